"""Exception types raised by the package."""


class HolonomyError(ValueError):
    """Base class for all package errors."""


class NonUnitNorm(HolonomyError):
    pass


class OrthogonalEndpoints(HolonomyError):
    """Raised when the end-state overlap vanishes and its phase is undefined."""


class NoConvergence(HolonomyError):
    pass


class ResolutionError(HolonomyError):
    """Adjacent path samples are too far apart and the path cannot be refined."""


class DegenerateLoop(HolonomyError):
    pass


class UndefinedPhase(HolonomyError):
    """The argument of a (near) zero complex number was requested."""


class NotReal(HolonomyError):
    pass


class OutOfRange(HolonomyError):
    pass


class InconsistentTarget(HolonomyError):
    """Target amplitudes cannot be produced by a thin-crystal engineered pump."""


class EmptyBlock(HolonomyError):
    pass


class ConfigError(HolonomyError):
    """Malformed sweep or circuit description."""
