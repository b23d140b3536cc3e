"""Exception hierarchy shared by every module."""


class MeasureError(Exception):
    """Base class for all library errors."""


class ValidationError(MeasureError, ValueError):
    """An object was constructed with parameters that break its invariants."""


class DomainError(MeasureError, ValueError):
    """An argument lies outside the domain of an operation."""


class SingularityError(DomainError):
    """A closed-form expression hit a vanishing denominator."""


class AccuracyError(DomainError):
    """The requested discretization is too coarse for the stated accuracy."""


class DivergenceError(MeasureError, ArithmeticError):
    """An improper integral does not converge for the given parameters."""


class ConvergenceError(MeasureError, ArithmeticError):
    """A truncated series did not reach its tolerance."""


class SamplingError(MeasureError, RuntimeError):
    """Constrained random sampling failed after its retry budget."""


class CutoffWarning(UserWarning):
    """A finite integration cutoff may be hiding a non-integrable endpoint."""


class TruncationWarning(UserWarning):
    """A truncated series may be missing a non-negligible tail."""
