"""Exception hierarchy shared by every module."""


class DeformationError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(DeformationError, ValueError):
    """Input outside the domain of an algebra, coefficient or distribution."""


class NumericalError(DeformationError, ArithmeticError):
    """A computation produced a non-finite value or hit a singularity."""


class ConvergenceError(DeformationError, ArithmeticError):
    """A series failed to converge within its term cap."""


class TruncationWarning(UserWarning):
    """An infinite-support table stopped before reaching its tail tolerance."""
