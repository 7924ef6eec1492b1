"""Exception hierarchy shared across the package."""


class MerakitError(Exception):
    """Base class for all package errors."""


class ShapeError(MerakitError, ValueError):
    """Tensor shapes or index specifications are inconsistent."""


class ArgumentError(MerakitError, ValueError):
    """An argument is malformed (duplicate pairing, bad permutation, ...)."""


class ChargeError(MerakitError, ValueError):
    """Charged-index sectors or directions are incompatible."""


class CapacityError(MerakitError, ValueError):
    """Requested object exceeds a configured size cap."""


class FactorizationError(MerakitError, RuntimeError):
    """A matrix factorization failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConvergenceError(MerakitError, RuntimeError):
    """An iterative solver exceeded its iteration budget.

    Carries the best residual reached so callers can decide whether the
    partial answer is still usable.
    """

    def __init__(self, message, residual=None, best=None):
        super().__init__(message)
        self.residual = residual
        self.best = best


class StateError(MerakitError, RuntimeError):
    """An operation was called before its required caches were built."""


class UnsupportedOperationError(MerakitError, ValueError):
    """The requested operation is not defined for this scheme/operator."""


class ConfigError(MerakitError, ValueError):
    """Run configuration failed validation."""


class CheckpointError(MerakitError, RuntimeError):
    """A checkpoint file is missing, corrupt, or version-incompatible."""
