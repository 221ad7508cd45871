"""Dense complex matrix kernel.

Everything in the package is built on a handful of SVD-backed primitives:
numerical rank, orthonormal bases of the four fundamental subspaces,
orthogonal projectors, subspace comparison and the Moore-Penrose inverse.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Functions never
modify their arguments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, ShapeError

# smallest positive normal double; keeps the rank cutoff positive for zero matrices
_TINY = np.finfo(float).tiny
# entries below this magnitude are skipped when fixing column phases
_PHASE_FLOOR = np.sqrt(np.finfo(float).eps)


@dataclass(frozen=True)
class NumericContext:
    """Tolerances for every numerical decision in the package.

    Attributes:
        rank_rtol: singular values at or below ``rank_rtol * sigma_max`` count as zero.
        eq_atol: Frobenius-norm tolerance for matrix and subspace equality.
        inv_tol: a smallest singular value above this certifies invertibility
            (or injectivity / surjectivity for rectangular factors).
    """

    rank_rtol: float = 1e-10
    eq_atol: float = 1e-8
    inv_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rtol", "eq_atol", "inv_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.rank_rtol >= 1:
            raise ValueError(f"rank_rtol must be < 1, got {self.rank_rtol!r}")


DEFAULT_CONTEXT = NumericContext()


def as_matrix(T, name="matrix") -> np.ndarray:
    """Convert ``T`` to a fresh 2-D complex128 array, rejecting NaN and infinities."""
    arr = np.array(T, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def adjoint(T) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(T).conj().T


def fro(T) -> float:
    """Frobenius norm; 0.0 for empty matrices."""
    T = np.asarray(T)
    if T.size == 0:
        return 0.0
    return float(np.linalg.norm(T, "fro"))


def relative_residual(lhs, rhs) -> float:
    """``||lhs - rhs||_F / max(||lhs||_F, ||rhs||_F)``, or 0.0 when both vanish."""
    scale = max(fro(lhs), fro(rhs))
    if scale == 0.0:
        return 0.0
    return fro(np.asarray(lhs) - np.asarray(rhs)) / scale


def require_square(T, name="matrix"):
    if T.shape[0] != T.shape[1]:
        raise ShapeError(f"{name} must be square, got {T.shape[0]}x{T.shape[1]}")


def block_diag(T1, T2) -> np.ndarray:
    """Block-diagonal matrix ``[[T1, 0], [0, T2]]``. Either block may be empty."""
    T1 = as_matrix(T1, "T1")
    T2 = as_matrix(T2, "T2")
    m1, n1 = T1.shape
    m2, n2 = T2.shape
    out = np.zeros((m1 + m2, n1 + n2), dtype=np.complex128)
    out[:m1, :n1] = T1
    out[m1:, n1:] = T2
    return out


def svd(T):
    """Full singular value decomposition ``T = W @ diag(sigma) @ Z^*``.

    Returns:
        ``(W, sigma, Z)`` with ``W`` (m x m) and ``Z`` (n x n) unitary and
        ``sigma`` of length ``min(m, n)``, nonincreasing.

    Raises:
        ConvergenceError: LAPACK did not converge.
    """
    T = as_matrix(T)
    try:
        W, sigma, Zh = np.linalg.svd(T, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"SVD did not converge for {T.shape[0]}x{T.shape[1]} matrix"
        ) from exc
    return W, sigma, adjoint(Zh)


def singular_values(T) -> np.ndarray:
    T = as_matrix(T)
    if T.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(T, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"SVD did not converge for {T.shape[0]}x{T.shape[1]} matrix"
        ) from exc


def _rank_from_sigma(sigma, ctx):
    if sigma.size == 0:
        return 0
    cutoff = ctx.rank_rtol * max(sigma[0], _TINY)
    return int(np.count_nonzero(sigma > cutoff))


def numerical_rank(T, ctx: NumericContext = DEFAULT_CONTEXT) -> int:
    return _rank_from_sigma(singular_values(T), ctx)


def smallest_singular_value(T) -> float:
    """Smallest of the ``min(m, n)`` singular values; ``inf`` for empty matrices.

    The empty convention makes 0x0 matrices (and n x 0 / 0 x n factors of a
    rank-0 factorization) count as invertible.
    """
    sigma = singular_values(T)
    if sigma.size == 0:
        return float("inf")
    return float(sigma[-1])


def is_injective(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    T = as_matrix(T)
    return T.shape[1] <= T.shape[0] and smallest_singular_value(T) > ctx.inv_tol


def is_surjective(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    T = as_matrix(T)
    return T.shape[0] <= T.shape[1] and smallest_singular_value(T) > ctx.inv_tol


def is_invertible(T, ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    T = as_matrix(T)
    return T.shape[0] == T.shape[1] and smallest_singular_value(T) > ctx.inv_tol


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Columns of ``carrier`` form an orthonormal basis of a subspace of C^ambient_dim."""

    carrier: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.carrier, "carrier")
        gram_err = fro(adjoint(Q) @ Q - np.eye(Q.shape[1]))
        if gram_err > DEFAULT_CONTEXT.eq_atol:
            raise ValueError(f"carrier columns are not orthonormal (||Q*Q - I|| = {gram_err:.3e})")
        Q.setflags(write=False)
        object.__setattr__(self, "carrier", Q)

    @property
    def ambient_dim(self) -> int:
        return self.carrier.shape[0]

    @property
    def dim(self) -> int:
        return self.carrier.shape[1]

    def projector(self) -> np.ndarray:
        return orthogonal_projector(self)


def _phase_normalize(Q):
    Q = Q.copy()
    for j in range(Q.shape[1]):
        col = Q[:, j]
        idx = np.flatnonzero(np.abs(col) > _PHASE_FLOOR)
        if idx.size:
            z = col[idx[0]]
            Q[:, j] = col * (abs(z) / z)
    return Q


def _canonical_basis(Q0):
    """Deterministic orthonormal basis of span(Q0).

    Depends only on the subspace (through its projector), not on the
    particular basis the SVD happened to return: pivoted QR of the projector
    picks coordinate-aligned columns first, then column phases are fixed so
    the first significant entry is real positive.
    """
    n, k = Q0.shape
    if k == 0:
        return np.zeros((n, 0), dtype=np.complex128)
    P = Q0 @ adjoint(Q0)
    Q, _, _ = scipy.linalg.qr(P, pivoting=True)
    return _phase_normalize(Q[:, :k])


def range_basis(T, ctx: NumericContext = DEFAULT_CONTEXT) -> OrthonormalBasis:
    """Orthonormal basis of R(T), of dimension ``numerical_rank(T)``."""
    W, sigma, _ = svd(T)
    r = _rank_from_sigma(sigma, ctx)
    return OrthonormalBasis(_canonical_basis(W[:, :r]))


def nullspace_basis(T, ctx: NumericContext = DEFAULT_CONTEXT) -> OrthonormalBasis:
    """Orthonormal basis of N(T), of dimension ``cols - numerical_rank(T)``."""
    _, sigma, Z = svd(T)
    r = _rank_from_sigma(sigma, ctx)
    return OrthonormalBasis(_canonical_basis(Z[:, r:]))


def orthogonal_projector(basis: OrthonormalBasis) -> np.ndarray:
    Q = basis.carrier
    return Q @ adjoint(Q)


def _same_ambient(b1, b2):
    if b1.ambient_dim != b2.ambient_dim:
        raise ShapeError(
            f"subspaces live in different spaces: C^{b1.ambient_dim} vs C^{b2.ambient_dim}"
        )


def subspace_equal(b1: OrthonormalBasis, b2: OrthonormalBasis,
                   ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    """Compare two subspaces through their orthogonal projectors."""
    _same_ambient(b1, b2)
    if b1.dim != b2.dim:
        return False
    return fro(orthogonal_projector(b1) - orthogonal_projector(b2)) <= ctx.eq_atol


def subspace_contained(b1: OrthonormalBasis, b2: OrthonormalBasis,
                       ctx: NumericContext = DEFAULT_CONTEXT) -> bool:
    """True iff span(b1) is a subspace of span(b2)."""
    _same_ambient(b1, b2)
    Q1 = b1.carrier
    return fro(orthogonal_projector(b2) @ Q1 - Q1) <= ctx.eq_atol


def pseudoinverse(T, ctx: NumericContext = DEFAULT_CONTEXT) -> np.ndarray:
    """Moore-Penrose inverse by truncated SVD."""
    W, sigma, Z = svd(T)
    r = _rank_from_sigma(sigma, ctx)
    return (Z[:, :r] / sigma[:r]) @ adjoint(W[:, :r])


def penrose_residuals(T, X) -> tuple[float, float, float, float]:
    """Frobenius residuals of the four Penrose equations for a candidate ``X = T^+``."""
    T = as_matrix(T)
    X = as_matrix(X)
    TX = T @ X
    XT = X @ T
    return (
        fro(TX @ T - T),
        fro(XT @ X - X),
        fro(adjoint(TX) - TX),
        fro(adjoint(XT) - XT),
    )
