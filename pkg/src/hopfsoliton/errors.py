"""Exception types raised by the solvers.

Every error carries enough context in its message to diagnose the failing
input; solver errors that abort a trajectory also keep the partial result.
"""


class SolitonError(Exception):
    """Base class for all package errors."""


class DomainError(SolitonError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(SolitonError, RuntimeError):
    """An iterative method hit its iteration cap."""


class HorizonExceeded(SolitonError, RuntimeError):
    """x never returned to zero before the integration horizon."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepUnderflow(SolitonError, RuntimeError):
    """The adaptive step size fell below the configured floor."""


class MissingEvent(SolitonError, ValueError):
    """The trajectory has no return time T."""


class NoBracket(SolitonError, RuntimeError):
    """No sign change of the shooting residual on the scan grid."""


class BoundaryMismatch(SolitonError, ValueError):
    """A trajectory's boundary slopes do not match the Hopf parameters."""


class NonPositivePhi(SolitonError, ValueError):
    """The warping function is not positive in the interior."""


class StabilityError(SolitonError, ValueError):
    """Explicit time step exceeds the parabolic stability bound."""


class MalformedFile(SolitonError, ValueError):
    """A profile or metadata file does not follow the documented layout."""
