"""
Exception hierarchy for the Kotz-Wishart toolkit.

Every error carries the exit code the command-line front end reports for it.
"""


class KotzWishartError(Exception):
    """Base class of all toolkit errors."""

    exit_code = 1


class DomainError(KotzWishartError, ValueError):
    """Argument outside the domain of a formula."""

    exit_code = 2


class NotPositiveDefiniteError(DomainError):
    """Matrix failed the positive-definiteness check."""


class SingularMatrixError(DomainError):
    """Matrix cannot be inverted."""


class RankDeficiencyError(DomainError):
    """Sampled SSP matrix is rank deficient."""


class DimensionMismatchError(DomainError):
    """Operands have incompatible shapes."""


class UnsupportedDegreeError(DomainError):
    """Partition weight beyond the available zonal table."""


class PreconditionError(KotzWishartError):
    """A structural precondition of a closed form does not hold."""

    exit_code = 3


class ConvergenceError(KotzWishartError, RuntimeError):
    """Numerical procedure did not reach its tolerance."""

    exit_code = 4


class DivergenceError(ConvergenceError):
    """Series contributions stopped decreasing."""


class SingularSystemError(ConvergenceError):
    """Linear system too ill-conditioned to solve reliably."""


class SeriesDivergenceWarning(RuntimeWarning):
    """Truncated series whose tail is not decreasing."""


class SingularDensityWarning(RuntimeWarning):
    """Density evaluated at an integrable singularity."""
