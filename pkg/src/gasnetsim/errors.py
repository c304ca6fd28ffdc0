"""Exception types shared across the package."""


class GasnetError(Exception):
    """Base class for all package errors."""


class ConfigurationError(GasnetError):
    """Invalid parameters, topology, or file content."""


class FormatError(ConfigurationError):
    """Malformed input file (syntax or semantic), with location/id context."""


class StateError(GasnetError):
    """Physically inadmissible state (non-positive density, non-finite values)."""


class InfeasibleFlowError(GasnetError):
    """Requested steady flow cannot be sustained by the pipe (pressure would vanish)."""


class FactorizationError(GasnetError):
    """Linear solve inside Newton failed (singular Jacobian)."""


class NonconvergenceError(GasnetError):
    """Newton iteration did not reach tolerance.

    Carries the best iterate seen and the residual-norm history so callers
    can diagnose or restart.
    """

    def __init__(self, message, x_best=None, history=None, time=None):
        super().__init__(message)
        self.x_best = x_best
        self.history = list(history) if history is not None else []
        self.time = time
