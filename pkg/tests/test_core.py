import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from epfactor.core import (
    NumericContext,
    OrthonormalBasis,
    adjoint,
    as_matrix,
    fro,
    nullspace_basis,
    numerical_rank,
    orthogonal_projector,
    penrose_residuals,
    pseudoinverse,
    range_basis,
    subspace_contained,
    subspace_equal,
    svd,
)
from epfactor.errors import ShapeError

from helpers import cgauss, mixed_random_matrices

SQRT2 = np.sqrt(2.0)


def basis(*cols):
    Q = np.array(cols, dtype=complex).T
    return OrthonormalBasis(Q / np.linalg.norm(Q, axis=0))


def empty_basis(n):
    return OrthonormalBasis(np.zeros((n, 0), complex))


# -- NumericContext / carrier validation -------------------------------------

@pytest.mark.parametrize("kwargs", [{"rank_rtol": 0}, {"rank_rtol": 1.0}, {"eq_atol": -1e-8},
                                    {"inv_tol": float("nan")}])
def test_context_rejects_bad_tolerances(kwargs):
    with pytest.raises(ValueError):
        NumericContext(**kwargs)


def test_as_matrix_rejects_non_finite():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ShapeError):
        as_matrix([1.0, 2.0])


def test_basis_requires_orthonormal_columns():
    with pytest.raises(ValueError):
        OrthonormalBasis(np.array([[1.0], [1.0]]))


# -- svd / rank ---------------------------------------------------------------

def _sigma_oracle(T):
    """Singular values as square roots of the roots of the characteristic polynomial of T*T."""
    lam = np.roots(np.poly(adjoint(T) @ T)).real
    return np.sqrt(np.clip(np.sort(lam)[::-1], 0, None))


@pytest.mark.parametrize("T", [
    np.diag([3.0, 0.0]),
    [[0, 1], [0, 0]],
    [[1, 1], [0, 0]],
])
def test_svd_examples(T, ctx):
    T = as_matrix(T)
    W, sigma, Z = svd(T)
    assert_allclose(sigma, _sigma_oracle(T), atol=1e-7)
    assert np.all(np.diff(sigma) <= 0)
    assert fro(W @ np.diag(sigma) @ adjoint(Z) - T) <= ctx.eq_atol
    assert fro(adjoint(W) @ W - np.eye(2)) <= ctx.eq_atol
    assert fro(adjoint(Z) @ Z - np.eye(2)) <= ctx.eq_atol


def test_svd_frozen_values():
    assert_allclose(svd(np.diag([3.0, 0.0]))[1], [3, 0])
    assert_allclose(svd([[0, 1], [0, 0]])[1], [1, 0])
    assert_allclose(svd([[1, 1], [0, 0]])[1], [SQRT2, 0], atol=1e-15)


@pytest.mark.parametrize("T, r", [
    (np.eye(4), 4),
    (np.zeros((3, 3)), 0),
    ([[1, 1], [0, 0]], 1),
    (np.zeros((0, 0)), 0),
    (np.zeros((3, 0)), 0),
])
def test_numerical_rank(T, r, ctx):
    assert numerical_rank(T, ctx) == r


def test_rank_is_scale_invariant(rng, ctx):
    T = cgauss(rng, 6, 3) @ cgauss(rng, 3, 6)
    for scale in (1e-200, 1e-8, 1.0, 1e150):
        assert numerical_rank(scale * T, ctx) == 3


# -- bases, projectors, subspace tests ----------------------------------------

def test_range_basis_examples(ctx):
    assert subspace_equal(range_basis([[1, 0], [0, 0]], ctx), basis([1, 0]), ctx)
    assert subspace_equal(range_basis([[0, 1], [0, 0]], ctx), basis([1, 0]), ctx)
    b = range_basis(np.zeros((2, 2)), ctx)
    assert b.dim == 0 and b.ambient_dim == 2


def test_nullspace_basis_examples(ctx):
    assert subspace_equal(nullspace_basis([[0, 1], [0, 0]], ctx), basis([1, 0]), ctx)
    assert nullspace_basis(np.eye(3), ctx).dim == 0
    N = nullspace_basis([[1, 1], [0, 0]], ctx)
    assert N.dim == 1
    # phase normalization fixes the sign: first significant entry real positive
    assert_allclose(N.carrier[:, 0], np.array([1, -1]) / SQRT2, atol=1e-15)


def test_bases_are_deterministic_and_coordinate_aligned(ctx):
    Q = range_basis(np.diag([2.0, 3.0, 0.0]), ctx).carrier
    assert_allclose(Q, np.eye(3)[:, :2], atol=1e-15)
    assert_allclose(nullspace_basis(np.diag([2.0, 3.0, 0.0]), ctx).carrier, [[0], [0], [1]], atol=1e-15)


def test_projector_examples(ctx):
    assert_allclose(orthogonal_projector(basis([1, 0])), [[1, 0], [0, 0]])
    assert_allclose(orthogonal_projector(empty_basis(2)), np.zeros((2, 2)))
    assert_allclose(orthogonal_projector(basis([1, 1])), 0.5 * np.ones((2, 2)), atol=1e-15)


def test_subspace_equal_examples(ctx):
    assert subspace_equal(basis([1, 0]), basis([-1, 0]), ctx)
    assert not subspace_equal(basis([1, 0]), basis([0, 1]), ctx)
    b1, b2 = basis([1, 0]), basis([1, 1])
    assert not subspace_equal(b1, b2, ctx)
    # hand value: ||diag(1,0) - 0.5*ones||_F = 1
    assert fro(orthogonal_projector(b1) - orthogonal_projector(b2)) == pytest.approx(1.0)
    assert not subspace_equal(basis([1, 0]), basis([1, 0], [0, 1]), ctx)
    with pytest.raises(ShapeError):
        subspace_equal(basis([1, 0]), basis([1, 0, 0]), ctx)


def test_subspace_contained_examples(ctx):
    assert subspace_contained(empty_basis(2), basis([1, 0]), ctx)
    assert subspace_contained(basis([1, 0]), basis([1, 0], [0, 1]), ctx)
    assert not subspace_contained(basis([1, 0]), basis([0, 1]), ctx)
    with pytest.raises(ShapeError):
        subspace_contained(basis([1, 0]), basis([1, 0, 0]), ctx)


# -- pseudoinverse ------------------------------------------------------------

@pytest.mark.parametrize("T, expected", [
    (np.eye(2), np.eye(2)),
    ([[0, 1], [0, 0]], [[0, 0], [1, 0]]),
    ([[1, 1], [0, 0]], [[0.5, 0], [0.5, 0]]),
])
def test_pseudoinverse_examples(T, expected, ctx):
    X = pseudoinverse(T, ctx)
    assert_allclose(X, expected, atol=1e-15)
    assert max(penrose_residuals(T, X)) <= 1e-14


def test_rank_one_pinv_formula(rng, ctx):
    # rank-one T: T^+ = T^* / ||T||_F^2
    T = np.outer(cgauss(rng, 5), cgauss(rng, 5))
    assert_allclose(pseudoinverse(T, ctx), adjoint(T) / fro(T) ** 2, atol=1e-14)


def test_pseudoinverse_of_empty_and_rectangular(ctx):
    assert pseudoinverse(np.zeros((0, 0)), ctx).shape == (0, 0)
    X = pseudoinverse(np.zeros((3, 2)), ctx)
    assert X.shape == (2, 3) and fro(X) == 0


def test_penrose_residuals_random(ctx):
    rng = np.random.default_rng(1)
    for _ in range(500):
        n = int(rng.integers(1, 11))
        m = int(rng.integers(1, 11))
        T = cgauss(rng, n, m)
        X = pseudoinverse(T, ctx)
        assert max(penrose_residuals(T, X)) <= 1e-10 * (1 + fro(T))


def test_pinv_subspaces_and_projectors(ctx):
    for spec, T in mixed_random_matrices(300, seed=2):
        X = pseudoinverse(T, ctx)
        Ts = adjoint(T)
        assert subspace_equal(range_basis(X, ctx), range_basis(Ts, ctx), ctx), spec
        assert subspace_equal(nullspace_basis(X, ctx), nullspace_basis(Ts, ctx), ctx), spec
        assert fro(T @ X - orthogonal_projector(range_basis(T, ctx))) <= ctx.eq_atol, spec
        assert fro(X @ T - orthogonal_projector(range_basis(Ts, ctx))) <= ctx.eq_atol, spec
        r = numerical_rank(T, ctx)
        assert numerical_rank(Ts, ctx) == r == numerical_rank(X, ctx), spec


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), k=st.integers(0, 8), seed=st.integers(0, 2**32 - 1))
def test_projector_hermitian_idempotent(n, k, seed):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    b = range_basis(cgauss(rng, n, k) if k else np.zeros((n, 1)))
    P = orthogonal_projector(b)
    assert fro(P - adjoint(P)) <= 1e-12
    assert fro(P @ P - P) <= 1e-12
    assert round(np.trace(P).real) == b.dim
