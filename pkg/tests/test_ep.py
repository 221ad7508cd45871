import numpy as np
import pytest
from numpy.testing import assert_allclose

from epfactor.core import (
    NumericContext,
    adjoint,
    fro,
    nullspace_basis,
    orthogonal_projector,
    pseudoinverse,
    range_basis,
    smallest_singular_value,
    subspace_contained,
)
from epfactor.ep import (
    absorbs_projector,
    direct_sum,
    ep_report,
    is_ep,
    is_ep_commute,
    is_ep_kernel,
    is_ep_orthosum,
    is_ep_range,
    is_index_le_one,
    restricted_operator,
)
from epfactor.errors import CriterionDisagreement, ShapeError
from epfactor.fixtures import GeneratorSpec, generate, paper_fixtures

from helpers import cgauss, mixed_random_matrices

JORDAN = [[0, 1], [0, 0]]
IDEMPOTENT = [[1, 1], [0, 0]]
CYCLIC = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
PREDICATES = [is_ep_kernel, is_ep_range, is_ep_orthosum, is_ep_commute]


@pytest.mark.parametrize("T, expected", [
    ([[1, 0], [0, 0]], True),
    (JORDAN, False),
    (CYCLIC, True),
])
def test_is_ep_kernel(T, expected, ctx):
    assert is_ep_kernel(T, ctx) is expected


@pytest.mark.parametrize("T, expected", [
    (np.eye(3), True),
    (JORDAN, False),
    ([[1, 1], [-1, 1]], True),
])
def test_is_ep_commute(T, expected, ctx):
    assert is_ep_commute(T, ctx) is expected


def test_commute_products_for_jordan(ctx):
    T = np.array(JORDAN, complex)
    X = pseudoinverse(T, ctx)
    assert_allclose(T @ X, np.diag([1, 0]), atol=1e-15)
    assert_allclose(X @ T, np.diag([0, 1]), atol=1e-15)


def test_normal_example_is_normal():
    T = np.array([[1, 1], [-1, 1]], complex)
    assert fro(T @ adjoint(T) - adjoint(T) @ T) == 0


@pytest.mark.parametrize("T, expected", [
    (np.diag([2.0, 0.0, 5.0]), True),
    (IDEMPOTENT, False),
    (np.zeros((0, 0)), True),
])
def test_is_ep_range(T, expected, ctx):
    assert is_ep_range(T, ctx) is expected


@pytest.mark.parametrize("T, expected", [
    (np.diag([1.0, 0.0]), True),
    (IDEMPOTENT, False),
    (JORDAN, False),
])
def test_is_ep_orthosum(T, expected, ctx):
    assert is_ep_orthosum(T, ctx) is expected


@pytest.mark.parametrize("pred", PREDICATES)
def test_predicates_reject_non_square(pred, ctx):
    with pytest.raises(ShapeError):
        pred(np.ones((2, 3)), ctx)


def test_ep_report_hermitian(ctx):
    rep = ep_report(np.diag([1.0, 0.0]), ctx)
    assert rep.verdict and all(rep.per_criterion.values())
    assert rep.counter_witness is None and rep.rank == 1


def test_ep_report_jordan_counter_witness(ctx):
    rep = ep_report(JORDAN, ctx)
    assert not rep.verdict and not any(rep.per_criterion.values())
    assert rep.witness_side == "N(T)"
    assert_allclose(rep.counter_witness, [1, 0], atol=1e-15)


def test_ep_report_oblique_conjugation(ctx):
    U = np.array([[1, 1], [0, 1]], complex)
    T = U @ np.diag([1, 0]) @ np.linalg.inv(U)
    assert_allclose(T, [[1, -1], [0, 0]], atol=1e-15)
    assert not ep_report(T, ctx).verdict


def test_counter_witness_separates_kernels(ctx):
    for spec, T in mixed_random_matrices(200, seed=3):
        rep = ep_report(T, ctx)
        if rep.verdict:
            assert rep.counter_witness is None
            continue
        w = rep.counter_witness
        inside, outside = (T, adjoint(T)) if rep.witness_side == "N(T)" else (adjoint(T), T)
        assert np.linalg.norm(w) == pytest.approx(1.0)
        assert np.linalg.norm(inside @ w) <= 1e-8 * (1 + fro(T)), spec
        assert np.linalg.norm(outside @ w) > 1e-8, spec


def test_criterion_disagreement_is_an_error():
    # rank-one, near-EP: the kernel gap is ~sqrt(2) * delta, the orthogonality defect ~delta
    ctx = NumericContext(eq_atol=1e-8)
    T = np.array([[1.0, 8e-9], [0.0, 0.0]])
    with pytest.raises(CriterionDisagreement) as exc:
        ep_report(T, ctx)
    verdicts = exc.value.verdicts
    assert len(set(verdicts.values())) == 2
    assert set(verdicts) == {"kernel_equality", "range_equality", "ortho_sum", "commute_pinv"}


# -- restricted operator, direct sum, index, absorption ---------------------------

def test_restricted_operator_examples(ctx):
    assert_allclose(restricted_operator(np.diag([2.0, 3.0, 0.0]), ctx), np.diag([2, 3]), atol=1e-15)
    assert_allclose(restricted_operator(np.eye(2), ctx), np.eye(2), atol=1e-15)
    R = restricted_operator(JORDAN, ctx)
    assert R.shape == (1, 1) and abs(R[0, 0]) <= 1e-15


def test_direct_sum_examples(ctx):
    S = direct_sum([[1.0]], [[0.0]])
    assert_allclose(S, np.diag([1, 0]))
    assert is_ep(S, ctx)
    S = direct_sum(JORDAN, np.eye(1))
    assert S.shape == (3, 3) and not is_ep(S, ctx)
    T = cgauss(np.random.default_rng(0), 3, 3)
    assert_allclose(direct_sum(np.zeros((0, 0)), T), T)
    with pytest.raises(ShapeError):
        direct_sum(np.ones((1, 2)), np.eye(2))


def test_direct_sum_ep_iff_both(ctx):
    mats = [T for _, T in mixed_random_matrices(40, seed=4, n_max=5)]
    for T1, T2 in zip(mats[::2], mats[1::2]):
        assert is_ep(direct_sum(T1, T2), ctx) == (is_ep(T1, ctx) and is_ep(T2, ctx))


@pytest.mark.parametrize("T, expected", [(IDEMPOTENT, True), (JORDAN, False), (np.eye(3), True)])
def test_is_index_le_one(T, expected, ctx):
    assert is_index_le_one(T, ctx) is expected


def test_absorbs_projector_examples(ctx, rng):
    A = cgauss(rng, 3, 2)
    P = orthogonal_projector(range_basis(A, ctx))
    assert absorbs_projector(P, A, "right", ctx)
    assert not absorbs_projector(JORDAN, [[1, 0], [0, 0]], "right", ctx)
    assert absorbs_projector(cgauss(rng, 4, 4), cgauss(rng, 4, 4), "right", ctx)
    with pytest.raises(ShapeError):
        absorbs_projector(np.eye(2), np.eye(3), "right", ctx)


def test_absorbs_projector_matches_kernel_inclusion(ctx):
    rng = np.random.default_rng(5)
    hits = 0
    for i in range(200):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        A = cgauss(rng, n, k) @ cgauss(rng, k, n)
        S = cgauss(rng, 3, n)
        if i % 2:
            S = S @ orthogonal_projector(range_basis(A, ctx))
        right = absorbs_projector(S, A, "right", ctx)
        assert right == subspace_contained(nullspace_basis(adjoint(A), ctx), nullspace_basis(S, ctx), ctx)
        hits += right
        Sl = adjoint(S)
        left = absorbs_projector(Sl, A, "left", ctx)
        assert left == subspace_contained(nullspace_basis(adjoint(A), ctx), nullspace_basis(adjoint(Sl), ctx), ctx)
    assert 0 < hits < 200


# -- properties -------------------------------------------------------------------

def test_four_criteria_agree(ctx):
    for spec, T in mixed_random_matrices(300, seed=6):
        verdicts = {p(T, ctx) for p in PREDICATES}
        assert len(verdicts) == 1, spec


def test_one_sided_inclusion_forces_ep(ctx):
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        r = int(rng.integers(1, n))
        T = cgauss(rng, n, r) @ cgauss(rng, r, n)
        NT, NTs = nullspace_basis(T, ctx), nullspace_basis(adjoint(T), ctx)
        if subspace_contained(NT, NTs, ctx) or subspace_contained(NTs, NT, ctx):
            assert is_ep_kernel(T, ctx)


def test_ep_consequences(ctx):
    for spec, T in mixed_random_matrices(200, seed=8):
        ep = is_ep(T, ctx)
        assert is_ep(adjoint(T), ctx) == ep, spec
        assert is_ep(pseudoinverse(T, ctx), ctx) == ep, spec
        if not ep:
            continue
        assert is_index_le_one(T, ctx), spec
        A = restricted_operator(T, ctx)
        assert A.shape[0] == 0 or smallest_singular_value(A) > ctx.inv_tol, spec
        tol = ctx.eq_atol * (1 + fro(T))
        assert fro(orthogonal_projector(range_basis(adjoint(T), ctx)) @ T - T) <= tol
        assert fro(T @ orthogonal_projector(range_basis(T, ctx)) - T) <= tol


def test_index_one_does_not_imply_ep(ctx):
    assert is_index_le_one(IDEMPOTENT, ctx) and not is_ep(IDEMPOTENT, ctx)


def test_projector_is_ep_iff_hermitian(ctx):
    rng = np.random.default_rng(9)
    for i in range(100):
        n = int(rng.integers(2, 8))
        spec = GeneratorSpec(seed=int(rng.integers(2**63)), n=n, r=int(rng.integers(1, n)),
                             kind="oblique_projector", skew=0.0 if i % 3 == 0 else 1.0)
        P = generate(spec)
        assert fro(P @ P - P) <= 1e-9 * (1 + fro(P) ** 2)
        hermitian = fro(P - adjoint(P)) <= 1e-8 * (1 + fro(P))
        assert is_ep(P, ctx) == hermitian, spec


def test_fixture_verdicts_survive_all_criteria(ctx):
    for fx in paper_fixtures():
        assert {p(fx.matrix, ctx) for p in PREDICATES} == {fx.expected_ep}, fx.name
