"""Exception hierarchy shared across the package."""


class LaneEmdenError(Exception):
    """Base class for all package errors."""


class ConfigError(LaneEmdenError):
    """Invalid configuration value (bad level, exponent, tolerance...)."""


class MeshError(LaneEmdenError):
    """Invalid or degenerate mesh."""


class DimensionError(LaneEmdenError):
    """Mismatched array dimensions."""


class NumericsError(LaneEmdenError):
    """Numerical breakdown (NaN, divergence, degenerate iterate)."""
