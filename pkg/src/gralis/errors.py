"""Exception hierarchy.

The CLI maps :class:`NumericalError` (and subclasses) to exit code 2 and every
other :class:`GralisError` to exit code 1.
"""


class GralisError(Exception):
    """Base class for all library errors."""


class ConfigurationError(GralisError, ValueError):
    """Unknown model name, malformed config, mismatched sizes."""


class DomainError(GralisError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(GralisError):
    """Problem too large for exact enumeration or dense storage."""


class DegenerateModelError(DomainError):
    """Model output has (numerically) zero variance."""


class WitnessUnavailableError(DomainError):
    """No input position exhibits the property a witness needs."""


class NumericalError(GralisError, ArithmeticError):
    """Non-finite values or failed numerical convergence.

    ``context`` carries whatever locates the failure (feature index,
    coalition bits, path parameter ...).
    """

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class RankDeficiencyError(NumericalError):
    """Normal equations are singular or too ill-conditioned to solve."""
