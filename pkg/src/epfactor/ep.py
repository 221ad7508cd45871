"""EP (range-Hermitian) predicates and related structural tests.

A square matrix ``T`` is EP when ``N(T) = N(T^*)``. The same property is
decided here four independent ways:

* ``kernel_equality``  -- N(T) = N(T^*)
* ``range_equality``   -- R(T) = R(T^*)
* ``ortho_sum``        -- R(T) and N(T) are orthogonal complements
* ``commute_pinv``     -- T T^+ = T^+ T

and :func:`ep_report` insists that they agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_CONTEXT,
    NumericContext,
    adjoint,
    as_matrix,
    block_diag,
    fro,
    nullspace_basis,
    numerical_rank,
    orthogonal_projector,
    pseudoinverse,
    range_basis,
    require_square,
    smallest_singular_value,
    subspace_contained,
    subspace_equal,
)
from .errors import CriterionDisagreement, ShapeError

__all__ = [
    "CRITERIA",
    "EpReport",
    "absorbs_projector",
    "direct_sum",
    "ep_report",
    "is_ep",
    "is_ep_commute",
    "is_ep_kernel",
    "is_ep_orthosum",
    "is_ep_range",
    "is_index_le_one",
    "kernel_inclusion",
    "restricted_operator",
]

CRITERIA = ("kernel_equality", "range_equality", "ortho_sum", "commute_pinv")


def _square(T):
    T = as_matrix(T, "T")
    require_square(T, "T")
    return T


def is_ep_kernel(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    T = _square(T)
    return subspace_equal(nullspace_basis(T, ctx), nullspace_basis(adjoint(T), ctx), ctx)


def is_ep_range(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    T = _square(T)
    return subspace_equal(range_basis(T, ctx), range_basis(adjoint(T), ctx), ctx)


def is_ep_orthosum(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    T = _square(T)
    R = range_basis(T, ctx)
    N = nullspace_basis(T, ctx)
    if R.dim + N.dim != T.shape[0]:
        return False
    return fro(orthogonal_projector(R) @ N.carrier) <= ctx.eq_atol


def is_ep_commute(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    # both products are orthogonal projectors, so an unscaled tolerance is used
    T = _square(T)
    X = pseudoinverse(T, ctx)
    return fro(T @ X - X @ T) <= ctx.eq_atol


is_ep = is_ep_kernel


@dataclass(frozen=True)
class EpReport:
    """Outcome of running every EP criterion on one matrix.

    ``counter_witness`` is a unit vector in N(T) but not in N(T^*) (or the
    other way round, see ``witness_side``); it is ``None`` for EP matrices.
    """

    verdict: bool
    per_criterion: dict = field(default_factory=dict)
    rank: int = 0
    counter_witness: Optional[np.ndarray] = None
    witness_side: Optional[str] = None


def _separating_vector(N1, N2):
    """Unit vector of span(N1) farthest from span(N2), with its distance."""
    Q1 = N1.carrier
    if Q1.shape[1] == 0:
        return None, 0.0
    M = Q1 - orthogonal_projector(N2) @ Q1
    _, s, Vh = np.linalg.svd(M, full_matrices=False)
    v = adjoint(Vh)[:, 0]
    w = Q1 @ v
    w = w / np.linalg.norm(w)
    k = np.flatnonzero(np.abs(w) > 1e-12)[0]
    w = w * (abs(w[k]) / w[k])
    return w, float(s[0])


def _counter_witness(T, ctx):
    Ts = adjoint(T)
    NT = nullspace_basis(T, ctx)
    NTs = nullspace_basis(Ts, ctx)
    candidates = []
    w, _ = _separating_vector(NT, NTs)
    if w is not None:
        candidates.append((float(np.linalg.norm(Ts @ w)), "N(T)", w))
    w, _ = _separating_vector(NTs, NT)
    if w is not None:
        candidates.append((float(np.linalg.norm(T @ w)), "N(T*)", w))
    if not candidates:
        return None, None
    # prefer N(T); fall back to the other side only if it separates better
    best = candidates[0]
    if best[0] <= ctx.eq_atol and len(candidates) > 1 and candidates[1][0] > best[0]:
        best = candidates[1]
    return best[2], best[1]


def ep_report(T, ctx: NumericContext = DEFAULT_CONTEXT) -> EpReport:
    """Evaluate all four EP criteria and collect a counter-witness when not EP.

    Raises:
        ShapeError: ``T`` is not square.
        CriterionDisagreement: the criteria do not agree, which means ``T``
            sits on the rank-decision boundary for the given tolerances.
    """
    T = _square(T)
    verdicts = {
        "kernel_equality": is_ep_kernel(T, ctx),
        "range_equality": is_ep_range(T, ctx),
        "ortho_sum": is_ep_orthosum(T, ctx),
        "commute_pinv": is_ep_commute(T, ctx),
    }
    values = set(verdicts.values())
    if len(values) != 1:
        raise CriterionDisagreement(verdicts)
    verdict = values.pop()
    witness = side = None
    if not verdict:
        witness, side = _counter_witness(T, ctx)
    return EpReport(
        verdict=verdict,
        per_criterion=verdicts,
        rank=numerical_rank(T, ctx),
        counter_witness=witness,
        witness_side=side,
    )


def direct_sum(T1, T2) -> np.ndarray:
    """``T1 (+) T2``; EP exactly when both summands are."""
    T1 = as_matrix(T1, "T1")
    T2 = as_matrix(T2, "T2")
    require_square(T1, "T1")
    require_square(T2, "T2")
    return block_diag(T1, T2)


def restricted_operator(T, ctx: NumericContext = DEFAULT_CONTEXT) -> np.ndarray:
    """Compression ``Q^* T Q`` of ``T`` to its range, ``Q`` an orthonormal basis of R(T).

    For EP ``T`` this is the matrix of ``T`` restricted to R(T) and is
    invertible; for non-EP ``T`` it need not be.
    """
    T = _square(T)
    Q = range_basis(T, ctx).carrier
    return adjoint(Q) @ T @ Q


def is_index_le_one(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    """True iff R(T) and N(T) are complementary (Drazin index 0 or 1).

    The sum may be oblique; complementarity is certified by the smallest
    singular value of ``[range basis | nullspace basis]``.
    """
    T = _square(T)
    R = range_basis(T, ctx)
    N = nullspace_basis(T, ctx)
    if R.dim + N.dim != T.shape[0]:
        return False
    joined = np.hstack([R.carrier, N.carrier])
    return smallest_singular_value(joined) > ctx.inv_tol


def absorbs_projector(S, A, side="right", ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    """Test ``S = S P_A`` (``side="right"``) or ``S = P_A S`` (``side="left"``).

    ``P_A`` is the orthogonal projector onto R(A). Equivalently
    N(A^*) is contained in N(S) (right) or in N(S^*) (left).
    """
    S = as_matrix(S, "S")
    A = as_matrix(A, "A")
    P = orthogonal_projector(range_basis(A, ctx))
    if side == "right":
        if S.shape[1] != A.shape[0]:
            raise ShapeError(f"S P_A undefined for S {S.shape} and A {A.shape}")
        diff = S - S @ P
    elif side == "left":
        if S.shape[0] != A.shape[0]:
            raise ShapeError(f"P_A S undefined for S {S.shape} and A {A.shape}")
        diff = S - P @ S
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return fro(diff) <= ctx.eq_atol * (1 + fro(S))


def kernel_inclusion(T, ctx: NumericContext = DEFAULT_CONTEXT):
    """Return ``(N(T) in N(T*), N(T*) in N(T))`` as two booleans."""
    T = _square(T)
    NT = nullspace_basis(T, ctx)
    NTs = nullspace_basis(adjoint(T), ctx)
    return subspace_contained(NT, NTs, ctx), subspace_contained(NTs, NT, ctx)
