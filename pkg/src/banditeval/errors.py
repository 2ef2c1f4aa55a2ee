"""Exception types shared across the package."""


class BanditEvalError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(BanditEvalError, ValueError):
    """Input shapes are inconsistent with the expected dimension."""


class NotPositiveDefiniteError(BanditEvalError, ValueError):
    """A matrix required to be (semi-)definite is not.

    ``pivot`` is the index of the failing Cholesky pivot when known.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


class NumericalError(BanditEvalError, RuntimeError):
    """A numerical routine failed to converge or produced garbage."""

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message)
        self.iterations = iterations


class DegenerateInputError(BanditEvalError, ValueError):
    """Input is degenerate for the requested quantity (e.g. zero matrix)."""


class InsufficientDataError(BanditEvalError, ValueError):
    """Not enough samples to compute the requested statistic."""


class ArmExhaustedError(BanditEvalError, RuntimeError):
    """A replay arm ran out of rows in without-replacement mode."""


class ConfigError(BanditEvalError, ValueError):
    """Invalid experiment configuration."""
