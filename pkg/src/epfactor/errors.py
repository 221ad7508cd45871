"""Exception types raised across the package."""


class EPFactorError(Exception):
    """Base class for all package errors."""


class ShapeError(EPFactorError, ValueError):
    """Operand dimensions are incompatible (non-square, mismatched ambient space, ...)."""


class ToleranceError(EPFactorError, ArithmeticError):
    """A numerical decision landed on the wrong side of a tolerance."""


class CriterionDisagreement(ToleranceError):
    """The EP criteria returned different verdicts for the same matrix.

    Attributes:
        verdicts: mapping of criterion name to its boolean verdict.
    """

    def __init__(self, verdicts):
        self.verdicts = dict(verdicts)
        super().__init__(f"EP criteria disagree: {self.verdicts}")


class NotEPError(EPFactorError, ValueError):
    """Operation requires an EP matrix and the input is not EP."""


class InvalidFactorization(EPFactorError, ValueError):
    """A supplied factorization does not reproduce its target matrix."""


class HypothesisError(EPFactorError, ValueError):
    """An injectivity / invertibility hypothesis of a deduction does not hold."""


class ConvergenceError(EPFactorError, ArithmeticError):
    """An iterative LAPACK routine failed to converge."""
