"""Decide whether a complex square matrix is EP (range-Hermitian) and build its factorizations."""
from .core import (
    DEFAULT_CONTEXT,
    NumericContext,
    OrthonormalBasis,
    nullspace_basis,
    numerical_rank,
    orthogonal_projector,
    pseudoinverse,
    range_basis,
    subspace_contained,
    subspace_equal,
    svd,
)
from .ep import EpReport, ep_report, is_ep
from .canonical import CanonicalForm, SolutionParams, canonical_form
from .fullrank import FullRankFactorization, full_rank_factorize

__version__ = "0.1.0"
