"""Exception types shared across the package."""


class DysonChaosError(Exception):
    """Base class for all package errors."""


class ValidationError(DysonChaosError, ValueError):
    """Raised when inputs violate a documented precondition."""


class CapabilityError(DysonChaosError):
    """Raised when a request exceeds what a routine can do (size caps, enumeration limits)."""


class GenerationError(DysonChaosError):
    """Raised when random graph generation exhausts its attempt budget."""


class ConvergenceError(DysonChaosError):
    """Raised when an iterative solver result is required to be converged but is not."""
