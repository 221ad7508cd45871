"""Seeded randomized verification suites.

Each suite draws random matrices, checks one family of identities at fixed
tolerances and returns a :class:`SuiteResult` listing every failure. They
back both ``epfactor verify`` and the acceptance tests.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import canonical as can
from . import fullrank as fr
from .core import (
    DEFAULT_CONTEXT,
    adjoint,
    fro,
    nullspace_basis,
    pseudoinverse,
    range_basis,
    relative_residual,
    smallest_singular_value,
    subspace_contained,
    subspace_equal,
)
from .ep import is_ep, is_ep_commute, is_ep_kernel, is_ep_orthosum, is_ep_range
from .fixtures import GeneratorSpec, generate, paper_fixtures, random_invertible, random_spec

WITNESS_INV_TOL = 1e-8
IDENTITY_RTOL = 1e-9
PINV_RTOL = 1e-9
PERTURBATION_FLOOR = 1e-3


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    checks: int = 0
    failures: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok, message):
        self.checks += 1
        if not ok:
            self.failures.append(message)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.cases} cases, {self.checks} checks, "
                f"{len(self.failures)} failures, {self.elapsed:.2f}s")


def random_ep(rng, n_max=12, cond_max=1e3):
    """Random EP matrix ``U (A (+) 0) U^*`` with cond(A) <= cond_max."""
    n = int(rng.integers(1, n_max + 1))
    r = int(rng.integers(0, n + 1))
    cond = 10 ** rng.uniform(0, np.log10(cond_max))
    spec = GeneratorSpec(seed=int(rng.integers(2**63)), n=n, r=r, kind="ep_canonical", cond=cond)
    return generate(spec), spec


def equivalences(count=500, seed=0, n_max=10, ctx=DEFAULT_CONTEXT) -> SuiteResult:
    """The four EP criteria agree on random matrices of every generator kind."""
    res = SuiteResult("equivalences")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    for _ in range(count):
        spec = random_spec(rng, n_max)
        T = generate(spec)
        verdicts = {
            "kernel": is_ep_kernel(T, ctx),
            "range": is_ep_range(T, ctx),
            "orthosum": is_ep_orthosum(T, ctx),
            "commute": is_ep_commute(T, ctx),
        }
        res.cases += 1
        res.check(len(set(verdicts.values())) == 1, f"{spec}: criteria disagree {verdicts}")
    res.elapsed = time.perf_counter() - t0
    return res


def witnesses(count=200, seed=0, n_max=12, regauges=20, ctx=DEFAULT_CONTEXT) -> SuiteResult:
    """Explicit witnesses are invertible and satisfy their identities; C = V B^* is gauge-stable."""
    res = SuiteResult("witnesses")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    for _ in range(count):
        T, spec = random_ep(rng, n_max)
        res.cases += 1
        Ts = adjoint(T)
        Tp = pseudoinverse(T, ctx)
        cf = can.canonical_form(T, ctx)

        V = can.witness_adjoint(cf)
        identities = {"adjoint: T*=VT": (Ts, V @ T)}
        witnesses_ = {"adjoint": V}
        V = can.witness_pinv_commuting(cf)
        identities["pinv: T+=VT"] = (Tp, V @ T)
        identities["pinv: T+=TV"] = (Tp, T @ V)
        witnesses_["pinv"] = V
        V = can.witness_gram(cf)
        identities["gram: T*T=VTT*"] = (Ts @ T, V @ T @ Ts)
        witnesses_["gram"] = V
        V = can.witness_sandwich(cf)
        identities["sandwich: T=VT*"] = (T, V @ Ts)
        identities["sandwich: T*T=TV*VT*"] = (Ts @ T, T @ adjoint(V) @ V @ Ts)
        witnesses_["sandwich"] = V

        for name, W in witnesses_.items():
            smin = smallest_singular_value(W)
            res.check(smin > WITNESS_INV_TOL, f"{spec}: {name} witness sigma_min {smin:.3e}")
        for name, (lhs, rhs) in identities.items():
            rr = relative_residual(lhs, rhs)
            res.check(rr <= IDENTITY_RTOL, f"{spec}: {name} residual {rr:.3e}")

        f = fr.full_rank_factorize(T, ctx)
        for k in range(regauges + 1):
            g = f if k == 0 else fr.regauge(f, random_invertible(rng, f.r, 10.0), ctx)
            V = fr.construct_V(g, ctx)
            rr = relative_residual(g.C, V @ adjoint(g.B))
            res.check(rr <= IDENTITY_RTOL, f"{spec}: C=VB* gauge {k} residual {rr:.3e}")
            res.check(smallest_singular_value(V) > WITNESS_INV_TOL, f"{spec}: V singular at gauge {k}")
            res.check(fr.ep_test_projectors(g, ctx) and fr.ep_test_absorption(g, ctx).verdict
                      and fr.ep_test_gram(g, ctx).verdict, f"{spec}: verdict changed at gauge {k}")
    res.elapsed = time.perf_counter() - t0
    return res


def families(matrices=20, draws=100, seed=0, n_max=12, ctx=DEFAULT_CONTEXT) -> SuiteResult:
    """Every member of each block-parametrized solution family solves its equation."""
    res = SuiteResult("families")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    for _ in range(matrices):
        T, spec = random_ep(rng, n_max)
        Ts = adjoint(T)
        Tp = pseudoinverse(T, ctx)
        TsT = Ts @ T
        TTs = T @ Ts
        cf = can.canonical_form(T, ctx)
        r, n = cf.r, cf.n
        for _ in range(draws):
            res.cases += 1
            p = can.SolutionParams.random(cf, rng)
            X = can.solve_family_adjoint(cf, p)
            rr = relative_residual(Ts, X @ T)
            res.check(rr <= IDENTITY_RTOL, f"{spec}: adjoint family residual {rr:.3e}")
            if 0 < r < n:
                C = rng.standard_normal((n - r, r)) + 1j * rng.standard_normal((n - r, r))
                Xbad = X + can._embed(cf, np.zeros((r, r)), lower=C)
                gap = fro(Ts - Xbad @ T)
                res.check(gap >= PERTURBATION_FLOOR, f"{spec}: (2,1) perturbation not detected ({gap:.3e})")

            X = can.solve_family_pinv(cf, p)
            rr = relative_residual(Tp, X @ T)
            res.check(rr <= IDENTITY_RTOL, f"{spec}: pinv family residual {rr:.3e}")

            X = can.solve_family_pinv_commuting(cf, p.d_block)
            rr = max(relative_residual(Tp, X @ T), relative_residual(Tp, T @ X))
            res.check(rr <= IDENTITY_RTOL, f"{spec}: commuting pinv family residual {rr:.3e}")

            X = can.solve_family_gram(cf, p)
            rr = relative_residual(TsT, X @ TTs)
            res.check(rr <= IDENTITY_RTOL, f"{spec}: gram family residual {rr:.3e}")

            X = can.solve_family_sandwich(cf, p)
            rr = relative_residual(TsT, T @ X @ Ts)
            res.check(rr <= IDENTITY_RTOL, f"{spec}: sandwich family residual {rr:.3e}")
    res.elapsed = time.perf_counter() - t0
    return res


def _fullrank_checks(res, label, T, ctx):
    ep = is_ep(T, ctx)
    f = fr.full_rank_factorize(T, ctx)
    proj = fr.ep_test_projectors(f, ctx)
    absorb = fr.ep_test_absorption(f, ctx)
    gram = fr.ep_test_gram(f, ctx)
    res.check(proj == ep, f"{label}: BB+=C+C gave {proj}, is_ep {ep}")
    res.check(proj == is_ep_commute(T, ctx), f"{label}: projector test differs from commute test")
    for key, val in absorb.pairs.items():
        res.check(val == ep, f"{label}: absorption pair {key} gave {val}, is_ep {ep}")
    for key, val in gram.pairs.items():
        res.check(val == ep, f"{label}: gram pair {key} gave {val}, is_ep {ep}")
    for key, val in absorb.atoms.items():
        res.check(not val or ep, f"{label}: atomic condition {key} holds but T is not EP")

    Ts = adjoint(T)
    for what, X, Y in (
        ("N(T)=N(C)", nullspace_basis(T, ctx), nullspace_basis(f.C, ctx)),
        ("R(T)=R(B)", range_basis(T, ctx), range_basis(f.B, ctx)),
        ("R(T*)=R(C*)", range_basis(Ts, ctx), range_basis(adjoint(f.C), ctx)),
        ("N(T*)=N(B*)", nullspace_basis(Ts, ctx), nullspace_basis(adjoint(f.B), ctx)),
    ):
        res.check(subspace_equal(X, Y, ctx), f"{label}: {what} fails")

    Tp = pseudoinverse(T, ctx)
    routes = {"svd": Tp, "fullrank": fr.pinv_via_fullrank(f, ctx)}
    if ep:
        routes["canonical"] = can.pinv_from_canonical(can.canonical_form(T, ctx))
    names = list(routes)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            rr = relative_residual(routes[names[i]], routes[names[j]])
            res.check(rr <= PINV_RTOL, f"{label}: pinv {names[i]} vs {names[j]} differ by {rr:.3e}")


def fullrank(count=200, seed=0, n_max=10, ctx=DEFAULT_CONTEXT) -> SuiteResult:
    """Full-rank EP characterizations, subspace identities and the three pseudoinverse routes."""
    res = SuiteResult("fullrank")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    for fx in paper_fixtures():
        res.cases += 1
        _fullrank_checks(res, f"fixture {fx.name}", fx.matrix, ctx)
    for _ in range(count):
        spec = random_spec(rng, n_max)
        res.cases += 1
        _fullrank_checks(res, str(spec), generate(spec), ctx)
    res.elapsed = time.perf_counter() - t0
    return res


def strengthening(count=200, seed=0, n_max=10, ctx=DEFAULT_CONTEXT) -> SuiteResult:
    """A one-sided kernel inclusion already forces EP for square matrices.

    Half the draws are generic products ``X Y`` (typically no inclusion), the
    other half ``X M X^*`` with invertible ``M`` (inclusion holds).
    """
    res = SuiteResult("strengthening")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    included = 0
    for i in range(count):
        n = int(rng.integers(2, n_max + 1))
        r = int(rng.integers(1, n))
        X = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
        if i % 2:
            Y = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
        else:
            Y = random_invertible(rng, r, 10.0) @ adjoint(X)
        T = X @ Y
        NT = nullspace_basis(T, ctx)
        NTs = nullspace_basis(adjoint(T), ctx)
        inc = subspace_contained(NT, NTs, ctx) or subspace_contained(NTs, NT, ctx)
        included += inc
        res.cases += 1
        res.check(not inc or is_ep_kernel(T, ctx), f"case {i} (n={n}, r={r}): inclusion without EP")
    res.check(included > 0, "no draw exercised the kernel inclusion")
    res.elapsed = time.perf_counter() - t0
    return res


SUITES = {
    "equivalences": equivalences,
    "witnesses": witnesses,
    "families": families,
    "fullrank": fullrank,
    "strengthening": strengthening,
}
