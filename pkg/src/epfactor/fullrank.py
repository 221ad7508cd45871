"""Full-rank factorizations ``T = B C`` and the EP tests expressed through ``B`` and ``C``.

``B`` is n x r with full column rank, ``C`` is r x n with full row rank and
``r = rank(T)``. The factorization is only determined up to the gauge
``(B, C) -> (B M, M^{-1} C)``; every test here is gauge invariant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    DEFAULT_CONTEXT,
    NumericContext,
    adjoint,
    as_matrix,
    fro,
    is_injective,
    is_invertible,
    is_surjective,
    numerical_rank,
    range_basis,
    require_square,
    smallest_singular_value,
    svd,
)
from .ep import is_ep
from .errors import HypothesisError, InvalidFactorization, NotEPError, ShapeError, ToleranceError


@dataclass(frozen=True, eq=False)
class FullRankFactorization:
    B: np.ndarray
    C: np.ndarray

    @property
    def r(self) -> int:
        return self.B.shape[1]

    def product(self) -> np.ndarray:
        return self.B @ self.C


def full_rank_factorize(T, ctx: NumericContext = DEFAULT_CONTEXT, method="svd") -> FullRankFactorization:
    """Factor ``T = B C``.

    Args:
        T: square matrix of any rank.
        method: ``"svd"`` puts the singular values into ``B``
            (``B = W_r diag(sigma)``, ``C = Z_r^*``); ``"restriction"`` uses
            ``B = T Q``, ``C = Q^*`` with ``Q`` an orthonormal basis of
            R(T^*), i.e. ``T`` restricted to R(T^*) followed by the
            projection onto R(T^*).
    """
    T = as_matrix(T, "T")
    require_square(T, "T")
    if method == "svd":
        W, sigma, Z = svd(T)
        r = numerical_rank(T, ctx)
        B = W[:, :r] * sigma[:r]
        C = adjoint(Z[:, :r])
    elif method == "restriction":
        Q = range_basis(adjoint(T), ctx).carrier
        B = T @ Q
        C = adjoint(Q)
    else:
        raise ValueError(f"unknown factorization method {method!r}")
    f = FullRankFactorization(B, C)
    err = fro(T - f.product())
    if err > ctx.eq_atol * (1 + fro(T)):
        raise ToleranceError(f"full-rank factorization does not reproduce T (residual {err:.3e})")
    return f


def regauge(f: FullRankFactorization, M, ctx: NumericContext = DEFAULT_CONTEXT) -> FullRankFactorization:
    """Return ``(B M, M^{-1} C)``, another full-rank factorization of the same matrix."""
    M = as_matrix(M, "M")
    if M.shape != (f.r, f.r):
        raise ShapeError(f"gauge matrix must be {f.r}x{f.r}, got {M.shape[0]}x{M.shape[1]}")
    if not is_invertible(M, ctx):
        raise ValueError("gauge matrix M is singular")
    return FullRankFactorization(f.B @ M, np.linalg.solve(M, f.C))


def pinv_left(B, ctx: NumericContext = DEFAULT_CONTEXT) -> np.ndarray:
    """``(B^*B)^{-1} B^*`` for ``B`` of full column rank (Cholesky solve)."""
    B = as_matrix(B, "B")
    if not is_injective(B, ctx):
        raise ValueError(f"B ({B.shape[0]}x{B.shape[1]}) does not have full column rank")
    if B.shape[1] == 0:
        return np.zeros((0, B.shape[0]), dtype=np.complex128)
    Bs = adjoint(B)
    return scipy.linalg.cho_solve(scipy.linalg.cho_factor(Bs @ B), Bs)


def pinv_right(C, ctx: NumericContext = DEFAULT_CONTEXT) -> np.ndarray:
    """``C^* (C C^*)^{-1}`` for ``C`` of full row rank (Cholesky solve)."""
    C = as_matrix(C, "C")
    if not is_surjective(C, ctx):
        raise ValueError(f"C ({C.shape[0]}x{C.shape[1]}) does not have full row rank")
    if C.shape[0] == 0:
        return np.zeros((C.shape[1], 0), dtype=np.complex128)
    # (CC^*)^{-1} C, then take the adjoint
    return adjoint(scipy.linalg.cho_solve(scipy.linalg.cho_factor(C @ adjoint(C)), C))


def pinv_via_fullrank(f: FullRankFactorization, ctx: NumericContext = DEFAULT_CONTEXT) -> np.ndarray:
    """``T^+ = C^+ B^+``."""
    return pinv_right(f.C, ctx) @ pinv_left(f.B, ctx)


def _close(X, Y, ctx, scale=None):
    if scale is None:
        scale = max(fro(X), fro(Y))
    return fro(X - Y) <= ctx.eq_atol * (1 + scale)


def ep_test_projectors(f: FullRankFactorization, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    """``B B^+ = C^+ C``, i.e. the projectors onto R(T) and R(T^*) agree."""
    B, C = f.B, f.C
    return fro(B @ pinv_left(B, ctx) - pinv_right(C, ctx) @ C) <= ctx.eq_atol


@dataclass(frozen=True)
class ConditionReport:
    """Verdict plus the individual conditions a characterization battery evaluated."""

    verdict: bool
    pairs: dict
    atoms: dict


def ep_test_absorption(f: FullRankFactorization, ctx: NumericContext = DEFAULT_CONTEXT) -> ConditionReport:
    """Projector absorption conditions on the factors.

    Atomic conditions (each is a kernel inclusion)::

        B   = C^+ C B        N(C)   in N(B^*)
        C   = C B B^+        N(B^*) in N(C)
        B^+ = B^+ C^+ C      N(C)   in N(B^*)
        C^+ = B B^+ C^+      N(B^*) in N(C)

    The four admissible pairings each characterize EP; ``pairs`` also carries
    the commutation ``T T^+ = T^+ T`` with ``T^+ = C^+ B^+`` under key ``"commute"``.
    """
    B, C = f.B, f.C
    Bp = pinv_left(B, ctx)
    Cp = pinv_right(C, ctx)
    PB = B @ Bp
    PC = Cp @ C
    atoms = {
        "B=C+CB": _close(B, PC @ B, ctx),
        "C=CBB+": _close(C, C @ PB, ctx),
        "B+=B+C+C": _close(Bp, Bp @ PC, ctx),
        "C+=BB+C+": _close(Cp, PB @ Cp, ctx),
    }
    T = B @ C
    Tp = Cp @ Bp
    pairs = {
        "commute": fro(T @ Tp - Tp @ T) <= ctx.eq_atol,
        "B=C+CB & C=CBB+": atoms["B=C+CB"] and atoms["C=CBB+"],
        "B+=B+C+C & C=CBB+": atoms["B+=B+C+C"] and atoms["C=CBB+"],
        "B=C+CB & C+=BB+C+": atoms["B=C+CB"] and atoms["C+=BB+C+"],
        "B+=B+C+C & C+=BB+C+": atoms["B+=B+C+C"] and atoms["C+=BB+C+"],
    }
    return ConditionReport(any(pairs.values()), pairs, atoms)


def ep_test_gram(f: FullRankFactorization, ctx: NumericContext = DEFAULT_CONTEXT) -> ConditionReport:
    """Gram-product identities for ``T^*T`` and ``TT^*`` in terms of the factors."""
    B, C = f.B, f.C
    Bs, Cs = adjoint(B), adjoint(C)
    PB = B @ pinv_left(B, ctx)
    PC = pinv_right(C, ctx) @ C
    T = B @ C
    TsT = Cs @ Bs @ T
    TTs = T @ Cs @ Bs
    scale = fro(T) ** 2
    atoms = {
        "T*T=C*B*BCBB+": _close(TsT, Cs @ Bs @ B @ C @ PB, ctx, scale),
        "T*T=C*B*C+CBC": _close(TsT, Cs @ Bs @ PC @ B @ C, ctx, scale),
        # C^*(C^*)^+ is the projector onto R(C^*), i.e. C^+ C
        "TT*=BCC*B*C*(C*)+": _close(TTs, T @ Cs @ Bs @ PC, ctx, scale),
        "TT*=BCBB+C*B*": _close(TTs, B @ C @ PB @ Cs @ Bs, ctx, scale),
    }
    a = list(atoms.values())
    pairs = {
        "T*T pair": a[0] and a[1],
        "TT* pair": a[2] and a[3],
        "first of each": a[0] and a[2],
        "second of each": a[1] and a[3],
    }
    return ConditionReport(any(pairs.values()), pairs, atoms)


def construct_V(f: FullRankFactorization, ctx: NumericContext = DEFAULT_CONTEXT) -> np.ndarray:
    """Invertible r x r ``V`` with ``C = V B^*`` for EP ``T = B C``.

    With ``Q`` an orthonormal basis of R(C^*), ``V = (C Q)(B^* Q)^{-1}``:
    the restriction of ``C`` to R(C^*) composed with the inverse of the
    restriction of ``B^*`` to the same space.

    Raises:
        NotEPError: ``B C`` is not EP.
        ToleranceError: ``B^* Q`` is numerically singular.
    """
    B, C = f.B, f.C
    if not is_ep(B @ C, ctx):
        raise NotEPError("C = V B^* has an invertible solution only for EP matrices")
    Q = range_basis(adjoint(C), ctx).carrier
    BsQ = adjoint(B) @ Q
    if smallest_singular_value(BsQ) <= ctx.inv_tol:
        raise ToleranceError("B^* restricted to R(C^*) is numerically singular")
    return np.linalg.solve(BsQ.T, (C @ Q).T).T


def deduce_ep_from_V(T, B, C, V, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    """Deduce EP from ``T = B C``, ``B`` injective, ``V`` invertible and ``C = V B^*``.

    ``C`` is not assumed surjective: it follows from ``C = V B^*`` because
    ``B^*`` is surjective. The conclusion ``N(B^*) = N(C)`` is then
    re-checked through :func:`ep_test_projectors`.

    Raises:
        HypothesisError: a hypothesis fails; the message names it.
    """
    T, B, C, V = (as_matrix(x, name) for x, name in zip((T, B, C, V), "TBCV"))
    if B.shape[0] != T.shape[0] or C.shape[1] != T.shape[1] or B.shape[1] != C.shape[0]:
        raise ShapeError("T = B C has inconsistent shapes")
    if V.shape != (B.shape[1], B.shape[1]):
        raise ShapeError(f"V must be {B.shape[1]}x{B.shape[1]}")
    err = fro(T - B @ C)
    if err > ctx.eq_atol * (1 + fro(T)):
        raise HypothesisError(f"T != B C (residual {err:.3e})")
    if not is_injective(B, ctx):
        raise HypothesisError("B not injective")
    if not is_invertible(V, ctx):
        raise HypothesisError("V not injective")
    err = fro(C - V @ adjoint(B))
    if err > ctx.eq_atol * (1 + fro(C)):
        raise HypothesisError(f"C != V B^* (residual {err:.3e})")
    if not is_surjective(C, ctx):
        raise ToleranceError("C = V B^* but C is numerically rank deficient")
    return ep_test_projectors(FullRankFactorization(B, C), ctx)


def check_factorization(f: FullRankFactorization, T, ctx: NumericContext = DEFAULT_CONTEXT):
    """Raise :class:`InvalidFactorization` unless ``f`` is a full-rank factorization of ``T``."""
    T = as_matrix(T, "T")
    if not is_injective(f.B, ctx):
        raise InvalidFactorization("B does not have full column rank")
    if not is_surjective(f.C, ctx):
        raise InvalidFactorization("C does not have full row rank")
    err = fro(T - f.product())
    if err > ctx.eq_atol * (1 + fro(T)):
        raise InvalidFactorization(f"B C does not reproduce T (residual {err:.3e})")
