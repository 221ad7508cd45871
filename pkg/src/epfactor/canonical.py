"""Unitary canonical form ``T = U (A (+) 0) U^*`` of an EP matrix and everything built on it.

Given the canonical form, the characterizing identities

* ``T^* = V T``
* ``T^+ = V T = T V``
* ``T^*T = V T T^*``
* ``T^*T = T V^* V T^*``

all have explicit invertible witnesses ``V = U (M (+) I) U^*`` with a block
``M`` that depends only on ``A``; replacing the identity block and the zero
off-diagonal blocks by free parameters gives every solution ``X`` of the
corresponding operator equation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_CONTEXT,
    NumericContext,
    adjoint,
    as_matrix,
    block_diag,
    fro,
    is_injective,
    is_invertible,
    nullspace_basis,
    range_basis,
    require_square,
    smallest_singular_value,
    subspace_contained,
)
from .ep import is_ep
from .errors import HypothesisError, InvalidFactorization, NotEPError, ShapeError, ToleranceError


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """``T = U @ (A (+) 0) @ U^*`` with ``U`` unitary (n x n) and ``A`` invertible (r x r).

    The first ``r`` columns of ``U`` are an orthonormal basis of R(T), the
    remaining ``n - r`` one of N(T).
    """

    U: np.ndarray
    A: np.ndarray

    @property
    def r(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.U.shape[0]


@dataclass(frozen=True, eq=False)
class SolutionParams:
    """Free blocks of a solution family, relative to a canonical form.

    Shapes: ``b_block`` r x (n-r), ``d_block`` (n-r) x (n-r) and, for the
    sandwich family only, ``c_block`` (n-r) x r.
    """

    b_block: np.ndarray
    d_block: np.ndarray
    c_block: Optional[np.ndarray] = None

    @classmethod
    def zeros(cls, cf: CanonicalForm, identity_d=True):
        r, k = cf.r, cf.n - cf.r
        d = np.eye(k, dtype=np.complex128) if identity_d else np.zeros((k, k), np.complex128)
        return cls(np.zeros((r, k), np.complex128), d, np.zeros((k, r), np.complex128))

    @classmethod
    def random(cls, cf: CanonicalForm, rng: np.random.Generator):
        r, k = cf.r, cf.n - cf.r

        def gauss(shape):
            return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

        return cls(gauss((r, k)), gauss((k, k)), gauss((k, r)))


def canonical_form(T, ctx: NumericContext = DEFAULT_CONTEXT) -> CanonicalForm:
    """Build ``U = [range basis | nullspace basis]`` and ``A = Q^* T Q``.

    Raises:
        NotEPError: ``T`` is not EP.
        ToleranceError: the compressed block is numerically singular, or the
            result fails to reproduce ``T``.
    """
    T = as_matrix(T, "T")
    require_square(T, "T")
    if not is_ep(T, ctx):
        raise NotEPError("canonical form requires EP: N(T) differs from N(T*)")
    Q = range_basis(T, ctx).carrier
    N = nullspace_basis(T, ctx).carrier
    U = np.hstack([Q, N])
    A = adjoint(Q) @ T @ Q
    sigma_min = smallest_singular_value(A)
    if sigma_min <= ctx.inv_tol:
        raise ToleranceError(
            f"range block is numerically singular (sigma_min = {sigma_min:.3e}); "
            "tolerances are inconsistent with the rank decision"
        )
    cf = CanonicalForm(U, A)
    err = fro(T - reconstruct(cf))
    if err > ctx.eq_atol * (1 + fro(T)):
        raise ToleranceError(f"canonical form does not reproduce T (residual {err:.3e})")
    return cf


def _embed(cf, block, upper=None, lower=None, corner=None):
    """``U @ [[block, upper], [lower, corner]] @ U^*``; missing blocks are zero."""
    r, k = cf.r, cf.n - cf.r
    M = np.zeros((cf.n, cf.n), dtype=np.complex128)
    M[:r, :r] = block
    if upper is not None:
        M[:r, r:] = upper
    if lower is not None:
        M[r:, :r] = lower
    if corner is not None:
        M[r:, r:] = corner
    return cf.U @ M @ adjoint(cf.U)


def reconstruct(cf: CanonicalForm) -> np.ndarray:
    return _embed(cf, cf.A)


def conjugate_by(G, U) -> np.ndarray:
    """``U G U^*``. EP transfers between ``G`` and the result whenever ``U`` is injective."""
    G = as_matrix(G, "G")
    U = as_matrix(U, "U")
    require_square(G, "G")
    if U.shape[1] != G.shape[0]:
        raise ShapeError(f"U has {U.shape[1]} columns but G is {G.shape[0]}x{G.shape[0]}")
    return U @ G @ adjoint(U)


def _right_inv(X, A):
    """``X A^{-1}`` via a linear solve."""
    return np.linalg.solve(A.T, X.T).T


def _inv(A):
    return np.linalg.solve(A, np.eye(A.shape[0], dtype=np.complex128))


def pinv_from_canonical(cf: CanonicalForm) -> np.ndarray:
    return _embed(cf, _inv(cf.A))


# Blocks sitting in the (1,1) position of each witness / solution family.

def _adjoint_block(A):
    # A^* A^{-1}
    return _right_inv(adjoint(A), A)


def _pinv_block(A):
    # A^{-2}
    Ainv = _inv(A)
    return Ainv @ Ainv


def _gram_block(A):
    # A^* A (A^*)^{-1} A^{-1} = A^*A (A A^*)^{-1}
    As = adjoint(A)
    return _right_inv(As @ A, A @ As)


def _sandwich_block(A):
    # A (A^*)^{-1}
    return _right_inv(A, adjoint(A))


def _sandwich_family_block(A):
    # A^{-1} A^* A (A^*)^{-1}
    return np.linalg.solve(A, _right_inv(adjoint(A) @ A, adjoint(A)))


def _identity_tail(cf):
    return np.eye(cf.n - cf.r, dtype=np.complex128)


def witness_adjoint(cf: CanonicalForm) -> np.ndarray:
    """Invertible ``V`` with ``T^* = V T``."""
    return _embed(cf, _adjoint_block(cf.A), corner=_identity_tail(cf))


def witness_pinv_commuting(cf: CanonicalForm) -> np.ndarray:
    """Invertible ``V`` with ``T^+ = V T = T V``."""
    return _embed(cf, _pinv_block(cf.A), corner=_identity_tail(cf))


def witness_gram(cf: CanonicalForm) -> np.ndarray:
    """Invertible ``V`` with ``T^*T = V T T^*``."""
    return _embed(cf, _gram_block(cf.A), corner=_identity_tail(cf))


def witness_sandwich(cf: CanonicalForm) -> np.ndarray:
    """Invertible ``V`` with ``T = V T^*``, hence ``T^*T = T V^* V T^*``."""
    return _embed(cf, _sandwich_block(cf.A), corner=_identity_tail(cf))


def simultaneous_similarity(cf: CanonicalForm):
    """``(U, A, A^*)``: ``T = U (A (+) 0) U^{-1}`` and ``T^* = U (A^* (+) 0) U^{-1}``."""
    return cf.U, cf.A, adjoint(cf.A)


def gram_canonical(cf: CanonicalForm):
    """``(U, A^*A, AA^*)``: unitary diagonalizations of ``T^*T`` and ``TT^*`` sharing ``U``."""
    A = cf.A
    return cf.U, adjoint(A) @ A, A @ adjoint(A)


def _check_params(cf, p, need_c=False):
    r, k = cf.r, cf.n - cf.r
    b = as_matrix(p.b_block, "b_block")
    d = as_matrix(p.d_block, "d_block")
    if b.shape != (r, k):
        raise ShapeError(f"b_block must be {r}x{k}, got {b.shape[0]}x{b.shape[1]}")
    if d.shape != (k, k):
        raise ShapeError(f"d_block must be {k}x{k}, got {d.shape[0]}x{d.shape[1]}")
    c = None
    if need_c and p.c_block is not None:
        c = as_matrix(p.c_block, "c_block")
        if c.shape != (k, r):
            raise ShapeError(f"c_block must be {k}x{r}, got {c.shape[0]}x{c.shape[1]}")
    return b, d, c


def solve_family_adjoint(cf: CanonicalForm, p: SolutionParams) -> np.ndarray:
    """Member of the solution set of ``T^* = X T`` selected by the free blocks."""
    b, d, _ = _check_params(cf, p)
    return _embed(cf, _adjoint_block(cf.A), upper=b, corner=d)


def solve_family_pinv(cf: CanonicalForm, p: SolutionParams) -> np.ndarray:
    """Member of the solution set of ``T^+ = X T``."""
    b, d, _ = _check_params(cf, p)
    return _embed(cf, _pinv_block(cf.A), upper=b, corner=d)


def solve_family_pinv_commuting(cf: CanonicalForm, d_block) -> np.ndarray:
    """Member of the solution set of ``T^+ = X T = T X``; only the null-space block is free."""
    k = cf.n - cf.r
    d = as_matrix(d_block, "d_block")
    if d.shape != (k, k):
        raise ShapeError(f"d_block must be {k}x{k}, got {d.shape[0]}x{d.shape[1]}")
    return _embed(cf, _pinv_block(cf.A), corner=d)


def solve_family_gram(cf: CanonicalForm, p: SolutionParams) -> np.ndarray:
    """Member of the solution set of ``T^*T = X T T^*``."""
    b, d, _ = _check_params(cf, p)
    return _embed(cf, _gram_block(cf.A), upper=b, corner=d)


def solve_family_sandwich(cf: CanonicalForm, p: SolutionParams) -> np.ndarray:
    """Member of the solution set of ``T^*T = T X T^*``; all blocks but (1,1) are free."""
    b, d, c = _check_params(cf, p, need_c=True)
    return _embed(cf, _sandwich_family_block(cf.A), upper=b, lower=c, corner=d)


def deduce_ep_from_pair(T, lhs, rhs, which="adjoint", ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    """Conclude EP from a pair of factorizations sharing the right factor ``S``.

    ``lhs = (V, A, S)`` and ``rhs = (W, B, S)`` must satisfy

    * ``which="adjoint"``: ``T = V (A (+) 0) S`` and ``T^* = W (B (+) 0) S``
    * ``which="gram"``:    ``T^*T = V (A (+) 0) S`` and ``TT^* = W (B (+) 0) S``

    with ``V``, ``A`` injective (giving N(T) in N(T^*)) and ``W``, ``B``
    injective (giving the reverse inclusion). After validating the
    hypotheses the two inclusions are checked on the subspace
    ``S^{-1}(0 (+) L)`` and their conjunction is returned.

    Raises:
        InvalidFactorization: a product does not reproduce its target.
        HypothesisError: an injectivity hypothesis fails; the message names the factor.
    """
    T = as_matrix(T, "T")
    require_square(T, "T")
    V, A, S = (as_matrix(x, name) for x, name in zip(lhs, ("V", "A", "S")))
    W, B, S2 = (as_matrix(x, name) for x, name in zip(rhs, ("W", "B", "S")))
    if S.shape != S2.shape or fro(S - S2) > ctx.eq_atol * (1 + fro(S)):
        raise InvalidFactorization("the two factorizations must share the right factor S")
    if which == "adjoint":
        targets = (T, adjoint(T))
    elif which == "gram":
        targets = (adjoint(T) @ T, T @ adjoint(T))
    else:
        raise ValueError(f"which must be 'adjoint' or 'gram', got {which!r}")

    n = T.shape[0]
    m = S.shape[0]
    for label, (L, core, target) in (("T-side", (V, A, targets[0])), ("adjoint-side", (W, B, targets[1]))):
        k = core.shape[0]
        if core.shape != (k, k) or L.shape != (n, m) or S.shape != (m, n) or k > m:
            raise ShapeError(f"{label} factorization has inconsistent shapes")
        prod = L @ block_diag(core, np.zeros((m - k, m - k))) @ S
        err = fro(prod - target)
        if err > ctx.eq_atol * (1 + fro(target)):
            raise InvalidFactorization(f"invalid factorization: {label} residual {err:.3e}")
    if A.shape != B.shape:
        raise InvalidFactorization("the core blocks A and B must act on the same space")

    if not is_injective(V, ctx):
        raise HypothesisError("V not injective")
    if not is_invertible(A, ctx):
        raise HypothesisError("A not injective")
    if not is_injective(W, ctx):
        raise HypothesisError("W not injective")
    if not is_invertible(B, ctx):
        raise HypothesisError("B not injective")

    # N(T) = S^{-1}(0 (+) L) from the first factorization; it lies in N(T^*)
    # by the second, and symmetrically.
    k = A.shape[0]
    shared = nullspace_basis(S[:k], ctx)
    ker_lhs = nullspace_basis(targets[0], ctx)
    ker_rhs = nullspace_basis(targets[1], ctx)
    return subspace_contained(shared, ker_rhs, ctx) and subspace_contained(ker_lhs, shared, ctx) \
        and subspace_contained(ker_rhs, shared, ctx)
