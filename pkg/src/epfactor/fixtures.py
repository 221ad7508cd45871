"""Named counterexample matrices, seeded random generators, and an exact pseudoinverse oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType

import numpy as np
import sympy

from .core import DEFAULT_CONTEXT, as_matrix, block_diag
from .ep import ep_report

KINDS = (
    "ep_canonical",
    "non_ep_nilpotent",
    "normal",
    "hermitian",
    "oblique_projector",
    "rank_deficient_product",
    "unitary",
)


@dataclass(frozen=True, eq=False)
class Fixture:
    """A named square matrix with a known EP verdict.

    ``companions`` holds the auxiliary matrices that go with the example
    (conjugating factors, one-sided witnesses, ...).
    """

    name: str
    matrix: np.ndarray
    expected_ep: bool
    provenance: str
    companions: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))


def _m(rows):
    return np.array(rows, dtype=np.complex128)


_U_CUT = _m([[0, 1, 0], [0, 0, 1]])
_G_NON_EP = _m([[0, 1, 0], [0, 1, 0], [0, 0, 0]])
_CYCLIC3 = _m([[0, 1, 0], [0, 0, 1], [1, 0, 0]])


def paper_fixtures(validate=True) -> list[Fixture]:
    """The catalog of small worked examples.

    With ``validate`` (the default) every fixture's verdict is re-derived by
    :func:`ep_report` and a mismatch raises ``AssertionError``.
    """
    e11 = _m([[1, 0], [0, 0]])
    jordan = _m([[0, 1], [0, 0]])
    fixtures = [
        Fixture("e11", e11, True,
                "Hermitian rank-one projector; image of a non-EP core under a non-injective U",
                MappingProxyType({"G": _G_NON_EP, "U": _U_CUT})),
        Fixture("jordan2", jordan, False,
                "2x2 nilpotent Jordan block; T^*T and TT^* diagonalize separately but not jointly; "
                "image of the EP cyclic permutation under a non-injective U",
                MappingProxyType({"G": _CYCLIC3, "U": _U_CUT})),
        Fixture("core_G", _G_NON_EP, False,
                "non-EP core whose compression by a non-injective U is EP"),
        Fixture("cyclic3", _CYCLIC3, True,
                "unitary cyclic permutation whose compression by a non-injective U is not EP"),
        Fixture("onesided_pinv", e11, True,
                "EP matrix with an invertible V satisfying T^+ = V T but not T^+ = T V",
                MappingProxyType({"V": _m([[1, 1], [0, 1]])})),
        Fixture("oblique_conjugation", _m([[1, -1], [0, 0]]), False,
                "U G U^{-1} with G = diag(1, 0) EP and U = [[1, 1], [0, 1]] invertible but not unitary",
                MappingProxyType({"G": _m([[1, 0], [0, 0]]), "U": _m([[1, 1], [0, 1]])})),
        Fixture("index_one_non_ep", _m([[1, 1], [0, 0]]), False,
                "idempotent with oblique range/kernel split: Drazin index 1 but not EP"),
    ]
    if validate:
        for fx in fixtures:
            got = ep_report(fx.matrix, DEFAULT_CONTEXT).verdict
            assert got == fx.expected_ep, f"fixture {fx.name}: expected EP={fx.expected_ep}, got {got}"
    return fixtures


def get_fixture(name: str) -> Fixture:
    for fx in paper_fixtures(validate=False):
        if fx.name == name:
            return fx
    raise KeyError(name)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for one random test matrix.

    ``skew`` only affects ``oblique_projector``: 0 gives an orthogonal
    projector, larger values tilt the kernel away from the range complement.
    ``cond`` bounds the condition number of the invertible core for
    ``ep_canonical``.
    """

    seed: int
    n: int
    r: int
    kind: str
    skew: float = 1.0
    cond: float = 1e3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if not 0 <= self.r <= self.n:
            raise ValueError(f"need 0 <= r <= n, got r={self.r}, n={self.n}")


def _gauss(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary(rng, n) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian with the phases of diag(R) removed."""
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    Q, R = np.linalg.qr(_gauss(rng, (n, n)))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_invertible(rng, r, cond=1e3) -> np.ndarray:
    """r x r matrix with singular values in [1, cond] (log-uniform) between random unitaries."""
    s = cond ** rng.uniform(0.0, 1.0, size=r)
    return (random_unitary(rng, r) * s) @ random_unitary(rng, r).conj().T


def generate(spec: GeneratorSpec) -> np.ndarray:
    """Deterministic random matrix of the requested structural class."""
    rng = np.random.default_rng(spec.seed)
    n, r, kind = spec.n, spec.r, spec.kind

    if kind == "ep_canonical":
        U = random_unitary(rng, n)
        A = random_invertible(rng, r, spec.cond)
        return U @ block_diag(A, np.zeros((n - r, n - r))) @ U.conj().T

    if kind == "non_ep_nilpotent":
        if n < 2 or not 1 <= r <= n - 1:
            raise ValueError(f"a non-EP nilpotent needs n >= 2 and 1 <= r <= n-1, got n={n}, r={r}")
        J = np.zeros((n, n), dtype=np.complex128)
        # chain e_{r} -> ... -> e_0 -> 0 with weights away from zero
        J[np.arange(r), np.arange(1, r + 1)] = rng.uniform(0.5, 2.0, size=r) * np.exp(
            2j * np.pi * rng.uniform(size=r))
        U = random_unitary(rng, n)
        return U @ J @ U.conj().T

    if kind in ("normal", "hermitian"):
        U = random_unitary(rng, n)
        mags = rng.uniform(0.5, 2.0, size=r) * rng.choice([-1.0, 1.0], size=r)
        if kind == "normal":
            lam = np.abs(mags) * np.exp(2j * np.pi * rng.uniform(size=r))
        else:
            lam = mags.astype(np.complex128)
        diag = np.concatenate([lam, np.zeros(n - r)])
        return (U * diag) @ U.conj().T

    if kind == "unitary":
        # always full rank; r is ignored
        return random_unitary(rng, n)

    if kind == "oblique_projector":
        if r == 0:
            return np.zeros((n, n), dtype=np.complex128)
        X = _gauss(rng, (n, r))
        Y = X + spec.skew * _gauss(rng, (n, r))
        return X @ np.linalg.solve(Y.conj().T @ X, Y.conj().T)

    # rank_deficient_product
    return _gauss(rng, (n, r)) @ _gauss(rng, (r, n))


def random_spec(rng, n_max=10, kinds=KINDS) -> GeneratorSpec:
    """Draw a valid :class:`GeneratorSpec` (kind, size and rank) from ``rng``."""
    kind = kinds[rng.integers(len(kinds))]
    if kind == "non_ep_nilpotent":
        n = int(rng.integers(2, n_max + 1))
        r = int(rng.integers(1, n))
    else:
        n = int(rng.integers(1, n_max + 1))
        r = n if kind == "unitary" else int(rng.integers(0, n + 1))
    return GeneratorSpec(seed=int(rng.integers(2**63)), n=n, r=r, kind=kind)


# -- exact oracle -----------------------------------------------------------

_MAX_DENOMINATOR = 1 << 20
_ORACLE_MAX_DIM = 4


def _exact_part(x):
    q = Fraction(x)  # exact for every finite double
    if q.denominator > _MAX_DENOMINATOR:
        raise ValueError(f"entry component {x!r} is not a simple rational")
    return sympy.Rational(q.numerator, q.denominator)


def _exact_entry(z):
    if isinstance(z, (Fraction, int)):
        q = Fraction(z)
        return sympy.Rational(q.numerator, q.denominator)
    if isinstance(z, sympy.Expr):
        re, im = z.as_real_imag()
        if not (re.is_rational and im.is_rational):
            raise ValueError(f"entry {z} is not a Gaussian rational")
        return re + sympy.I * im
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError("entries must be finite")
    return _exact_part(z.real) + sympy.I * _exact_part(z.imag)


def exact_matrix(T) -> sympy.Matrix:
    rows = [list(row) for row in (T.tolist() if isinstance(T, np.ndarray) else T)]
    return sympy.Matrix([[_exact_entry(z) for z in row] for row in rows])


def exact_pinv(T) -> sympy.Matrix:
    """Exact ``T^+`` over Q(i) from a row-echelon rank factorization.

    Row reduction gives ``T = B C`` with ``B`` the pivot columns of ``T`` and
    ``C`` the nonzero rows of the reduced echelon form; then
    ``T^+ = C^* (C C^*)^{-1} (B^* B)^{-1} B^*``. The four Penrose equations
    are checked exactly before returning.
    """
    M = exact_matrix(T)
    m, n = M.shape
    rref, pivots = M.rref(simplify=True)
    r = len(pivots)
    if r == 0:
        X = sympy.zeros(n, m)
    else:
        B = M.extract(list(range(m)), list(pivots))
        C = rref[:r, :]
        Bs, Cs = B.H, C.H
        X = Cs * (C * Cs).inv() * (Bs * B).inv() * Bs
        X = X.applyfunc(sympy.nsimplify).applyfunc(sympy.expand)
    for lhs, rhs in ((M * X * M, M), (X * M * X, X), ((M * X).H, M * X), ((X * M).H, X * M)):
        if (lhs - rhs).applyfunc(sympy.expand) != sympy.zeros(*rhs.shape):
            raise ArithmeticError("exact pseudoinverse failed a Penrose equation")
    return X


def oracle_pinv(T) -> np.ndarray:
    """Independent pseudoinverse for small matrices with simple rational entries.

    Raises:
        ValueError: a dimension exceeds 4 or an entry is not exactly a simple rational.
    """
    if isinstance(T, np.ndarray):
        shape = T.shape
    else:
        shape = (len(T), len(T[0]) if len(T) else 0)
    if len(shape) != 2 or max(shape) > _ORACLE_MAX_DIM:
        raise ValueError(f"oracle handles matrices up to {_ORACLE_MAX_DIM}x{_ORACLE_MAX_DIM}, got {shape}")
    X = exact_pinv(T)
    out = np.zeros(X.shape, dtype=np.complex128)
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            re, im = X[i, j].as_real_imag()
            out[i, j] = complex(_to_float(re), _to_float(im))
    return out


def _to_float(q):
    q = sympy.Rational(q)
    return float(Fraction(int(q.p), int(q.q)))  # correctly rounded
