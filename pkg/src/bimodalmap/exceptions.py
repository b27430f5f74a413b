"""Exception hierarchy shared by all modules."""


class BimodalMapError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BimodalMapError, ValueError):
    """Argument lies outside the domain of a closed-form expression."""


class CriticalPointError(BimodalMapError, ValueError):
    """Evaluation requested too close to a zero of f'."""


class NoFixedPoint(BimodalMapError, ValueError):
    """The map has no fixed point at these parameters (k/b - 1 <= 0)."""


class NotInRegion(BimodalMapError, ValueError):
    """Parameters are outside the region an operation requires."""


class BracketError(BimodalMapError, RuntimeError):
    """A root bracket could not be established."""


class UnresolvedAttractor(BimodalMapError, RuntimeError):
    """An orbit tail is neither periodic nor clearly chaotic."""

    def __init__(self, message, lyapunov=float("nan")):
        super().__init__(message)
        self.lyapunov = lyapunov


class NoConvergence(BimodalMapError, RuntimeError):
    """Newton iteration failed; ``residuals`` holds the last residual vector."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class SingularJacobian(NoConvergence):
    """Newton step undefined because the Jacobian is (numerically) singular."""


class StepUnderflow(BimodalMapError, RuntimeError):
    """Adaptive integrator step fell below the minimum step size."""


class NoCrossings(BimodalMapError, RuntimeError):
    """A trajectory never crossed the Poincare section in the required direction."""


class ConfigError(BimodalMapError, ValueError):
    """Invalid job configuration; ``where`` names the offending line or field."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
