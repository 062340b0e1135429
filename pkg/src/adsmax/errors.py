"""Exception types shared across the package."""


class AdsmaxError(Exception):
    """Base class for all package-specific errors."""


class DomainError(AdsmaxError, ValueError):
    """A point lies outside a chart, or a geometric input is invalid."""


class PoleOrderError(AdsmaxError, ValueError):
    """A Laurent series operation would produce a pole of order > 2."""


class RulingError(AdsmaxError, ValueError):
    """An isometry does not act coherently on the two boundary rulings."""


class SolverError(AdsmaxError, RuntimeError):
    """The elliptic solve failed (no bracket, divergence, or stagnation)."""


class FrameError(AdsmaxError, RuntimeError):
    """Frame integration failed (step underflow or bad path data)."""


class ConfigError(AdsmaxError, ValueError):
    """A run configuration is malformed or contains unknown keys."""
