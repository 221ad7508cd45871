"""Command-line interface.

Every command prints one JSON document on stdout. Exit codes are shared by
all commands: 0 for success / EP, 1 for a definite negative verdict
(non-EP input, failed suite), 2 for input or tolerance errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import canonical as can
from . import fullrank as fr
from . import matrixfile, verify
from .core import (
    DEFAULT_CONTEXT,
    NumericContext,
    adjoint,
    fro,
    penrose_residuals,
    pseudoinverse,
    require_square,
)
from .ep import ep_report, is_index_le_one
from .errors import EPFactorError, NotEPError
from .fixtures import get_fixture, paper_fixtures
from .matrixfile import MatrixFileError, matrix_to_dict

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2

WITNESS_KINDS = ("adjoint", "pinv", "gram", "sandwich", "fullrank-V")


class Identities:
    """Residual ledger: each entry records residual, tolerance and ok/failed."""

    def __init__(self):
        self.entries = {}

    def add(self, name, residual, tolerance):
        residual = float(residual)
        self.entries[name] = {
            "residual": residual,
            "tolerance": float(tolerance),
            "status": "ok" if residual <= tolerance else "failed",
        }

    def close(self, name, lhs, rhs, ctx, scale=None):
        if scale is None:
            scale = max(fro(lhs), fro(rhs))
        self.add(name, fro(lhs - rhs), ctx.eq_atol * (1 + scale))


def _context(args) -> NumericContext:
    return NumericContext(rank_rtol=args.rank_rtol, eq_atol=args.eq_atol, inv_tol=args.inv_tol)


def _load(path):
    raw = Path(path).read_bytes()
    T = matrixfile.loads(raw.decode("utf-8"))
    return T, hashlib.sha256(raw).hexdigest()


def _tolerances(ctx):
    return {"rank_rtol": ctx.rank_rtol, "eq_atol": ctx.eq_atol, "inv_tol": ctx.inv_tol}


def _vector(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).reshape(-1)]


def _witness(kind, T, ctx, ids):
    """Compute one witness and record its defining identity; raises NotEPError for non-EP T."""
    Ts = adjoint(T)
    if kind == "fullrank-V":
        f = fr.full_rank_factorize(T, ctx)
        V = fr.construct_V(f, ctx)
        ids.close("C=VB*", f.C, V @ adjoint(f.B), ctx)
        return V
    cf = can.canonical_form(T, ctx)
    if kind == "adjoint":
        V = can.witness_adjoint(cf)
        ids.close("T*=VT", Ts, V @ T, ctx)
    elif kind == "pinv":
        V = can.witness_pinv_commuting(cf)
        Tp = pseudoinverse(T, ctx)
        ids.close("T+=VT", Tp, V @ T, ctx)
        ids.close("T+=TV", Tp, T @ V, ctx)
    elif kind == "gram":
        V = can.witness_gram(cf)
        ids.close("T*T=VTT*", Ts @ T, V @ T @ Ts, ctx)
    elif kind == "sandwich":
        V = can.witness_sandwich(cf)
        ids.close("T=VT*", T, V @ Ts, ctx)
        ids.close("T*T=TV*VT*", Ts @ T, T @ adjoint(V) @ V @ Ts, ctx)
    else:
        raise ValueError(f"unknown witness kind {kind!r}")
    return V


def cmd_analyze(args):
    ctx = _context(args)
    T, digest = _load(args.path)
    require_square(T, "matrix")
    rep = ep_report(T, ctx)
    ids = Identities()
    scale = 1 + fro(T)

    Tp = pseudoinverse(T, ctx)
    for name, res in zip(("TT+T=T", "T+TT+=T+", "(TT+)*=TT+", "(T+T)*=T+T"), penrose_residuals(T, Tp)):
        ids.add(f"penrose {name}", res, ctx.eq_atol * scale)

    f = fr.full_rank_factorize(T, ctx, method=args.method)
    ids.close("T=BC", T, f.product(), ctx)

    canonical = None
    witnesses = {}
    separation = None
    if rep.verdict:
        cf = can.canonical_form(T, ctx)
        ids.close("T=U(A+0)U*", T, can.reconstruct(cf), ctx)
        canonical = {"r": cf.r, "U": matrix_to_dict(cf.U), "A": matrix_to_dict(cf.A)}
        for kind in args.witness or ():
            witnesses[kind] = matrix_to_dict(_witness(kind, T, ctx, ids))
    elif rep.counter_witness is not None:
        w = rep.counter_witness
        inside, outside = (T, adjoint(T)) if rep.witness_side == "N(T)" else (adjoint(T), T)
        ids.add(f"counter-witness in {rep.witness_side}", np.linalg.norm(inside @ w), ctx.eq_atol)
        separation = {"inside_norm": float(np.linalg.norm(inside @ w)),
                      "outside_norm": float(np.linalg.norm(outside @ w))}

    doc = {
        "command": "analyze",
        "input": {"path": str(args.path), "sha256": digest, "rows": T.shape[0], "cols": T.shape[1]},
        "tolerances": _tolerances(ctx),
        "rank": rep.rank,
        "ep": {
            "verdict": rep.verdict,
            "criteria": rep.per_criterion,
            "counter_witness": None if rep.counter_witness is None else _vector(rep.counter_witness),
            "witness_side": rep.witness_side,
            "witness_separation": separation,
        },
        "index_le_one": is_index_le_one(T, ctx),
        "canonical": canonical,
        "fullrank": {"r": f.r, "B": matrix_to_dict(f.B), "C": matrix_to_dict(f.C)},
        "pseudoinverse": matrix_to_dict(Tp),
        "witnesses": witnesses,
        "identities": ids.entries,
    }
    if not rep.verdict and args.witness:
        doc["witnesses_skipped"] = "witnesses exist only for EP matrices"
    _emit(doc)
    return EXIT_OK if rep.verdict else EXIT_NEGATIVE


def cmd_factorize(args):
    ctx = _context(args)
    T, digest = _load(args.path)
    require_square(T, "matrix")
    ids = Identities()
    if args.form == "canonical":
        try:
            cf = can.canonical_form(T, ctx)
        except NotEPError as exc:
            _emit({"command": "factorize", "form": "canonical", "error": str(exc),
                   "explanation": "T = U (A (+) 0) U^* with U unitary and A invertible exists "
                                  "exactly when T is EP"})
            return EXIT_NEGATIVE
        factors = {"U": cf.U, "A": cf.A}
        ids.close("T=U(A+0)U*", T, can.reconstruct(cf), ctx)
        r = cf.r
    else:
        f = fr.full_rank_factorize(T, ctx, method=args.method)
        factors = {"B": f.B, "C": f.C}
        ids.close("T=BC", T, f.product(), ctx)
        r = f.r
    written = {}
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, M in factors.items():
            p = out / f"{name}.json"
            matrixfile.write_matrix(p, M)
            written[name] = str(p)
    _emit({
        "command": "factorize",
        "form": args.form,
        "input": {"path": str(args.path), "sha256": digest},
        "tolerances": _tolerances(ctx),
        "r": r,
        "factors": {k: matrix_to_dict(v) for k, v in factors.items()},
        "files": written,
        "identities": ids.entries,
    })
    return EXIT_OK


def cmd_witness(args):
    ctx = _context(args)
    T, digest = _load(args.path)
    require_square(T, "matrix")
    ids = Identities()
    try:
        V = _witness(args.kind, T, ctx, ids)
    except NotEPError as exc:
        _emit({"command": "witness", "kind": args.kind, "error": str(exc)})
        return EXIT_NEGATIVE
    _emit({
        "command": "witness",
        "kind": args.kind,
        "input": {"path": str(args.path), "sha256": digest},
        "tolerances": _tolerances(ctx),
        "V": matrix_to_dict(V),
        "identities": ids.entries,
    })
    return EXIT_OK


def cmd_pinv(args):
    ctx = _context(args)
    T, digest = _load(args.path)
    Tp = pseudoinverse(T, ctx)
    ids = Identities()
    scale = 1 + fro(T)
    for name, res in zip(("TT+T=T", "T+TT+=T+", "(TT+)*=TT+", "(T+T)*=T+T"), penrose_residuals(T, Tp)):
        ids.add(f"penrose {name}", res, ctx.eq_atol * scale)
    _emit({
        "command": "pinv",
        "input": {"path": str(args.path), "sha256": digest},
        "tolerances": _tolerances(ctx),
        "pseudoinverse": matrix_to_dict(Tp),
        "identities": ids.entries,
    })
    return EXIT_OK


def cmd_verify(args):
    ctx = _context(args)
    seed = int(os.environ["EPFACTOR_SEED"]) if os.environ.get("EPFACTOR_SEED") else args.seed
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    results = [verify.SUITES[name](seed=seed, ctx=ctx) for name in names]
    for res in results:
        print(res.summary(), file=sys.stderr)
    _emit({
        "command": "verify",
        "seed": seed,
        "tolerances": _tolerances(ctx),
        "suites": {
            res.name: {"passed": res.passed, "cases": res.cases, "checks": res.checks,
                       "failures": res.failures[:20], "elapsed_s": res.elapsed}
            for res in results
        },
    })
    return EXIT_OK if all(r.passed for r in results) else EXIT_NEGATIVE


def cmd_fixture(args):
    if args.name is None:
        _emit({"fixtures": [{"name": fx.name, "expected_ep": fx.expected_ep, "provenance": fx.provenance}
                            for fx in paper_fixtures()]})
        return EXIT_OK
    try:
        fx = get_fixture(args.name)
    except KeyError:
        _error(f"unknown fixture {args.name!r}")
        return EXIT_ERROR
    if args.output:
        matrixfile.write_matrix(args.output, fx.matrix)
    else:
        print(matrixfile.dumps(fx.matrix))
    return EXIT_OK


def _emit(doc):
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _error(message, field=None):
    _emit({"error": message, "field": field})
    print(f"epfactor: error: {message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--rank-rtol", type=float, default=DEFAULT_CONTEXT.rank_rtol)
    tol.add_argument("--eq-atol", type=float, default=DEFAULT_CONTEXT.eq_atol)
    tol.add_argument("--inv-tol", type=float, default=DEFAULT_CONTEXT.inv_tol)

    parser = argparse.ArgumentParser(prog="epfactor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[tol], help="EP verdict, factorizations and residuals")
    p.add_argument("path")
    p.add_argument("--witness", action="append", choices=WITNESS_KINDS,
                   help="also construct this witness (repeatable; EP inputs only)")
    p.add_argument("--method", choices=("svd", "restriction"), default="svd",
                   help="full-rank factorization construction")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("factorize", parents=[tol], help="write canonical or full-rank factors")
    p.add_argument("path")
    p.add_argument("--form", choices=("canonical", "fullrank"), required=True)
    p.add_argument("--method", choices=("svd", "restriction"), default="svd")
    p.add_argument("--out-dir", help="directory for the factor matrix files")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("witness", parents=[tol], help="construct a witness operator")
    p.add_argument("path")
    p.add_argument("--kind", choices=WITNESS_KINDS, required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("pinv", parents=[tol], help="Moore-Penrose inverse with Penrose residuals")
    p.add_argument("path")
    p.set_defaults(func=cmd_pinv)

    p = sub.add_parser("verify", parents=[tol], help="run a seeded property suite")
    p.add_argument("--suite", choices=(*verify.SUITES, "all"), default="all")
    p.add_argument("--seed", type=int, default=0, help="overridden by $EPFACTOR_SEED")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fixture", help="list fixtures, or export one as a matrix file")
    p.add_argument("name", nargs="?")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MatrixFileError as exc:
        _error(str(exc), exc.field)
    except FileNotFoundError as exc:
        _error(f"cannot read {exc.filename}")
    except UnicodeDecodeError:
        _error("input is not UTF-8 text")
    except (EPFactorError, ValueError) as exc:
        _error(str(exc))
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
