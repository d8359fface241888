"""Exception types shared across the package."""


class AutopruneError(Exception):
    """Base class for errors raised by this package."""


class GeometryError(AutopruneError):
    """A layer's spatial geometry is invalid (e.g. kernel larger than input)."""


class ShapeError(AutopruneError):
    """Tensor shapes do not line up for an operation."""


class TrainingError(AutopruneError):
    """A training step produced a non-finite value or an unmet training gate."""


class ConfigError(AutopruneError):
    """A run configuration is invalid or infeasible."""
