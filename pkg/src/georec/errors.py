"""Exception types shared across the package."""


class GeorecError(Exception):
    """Base class for errors raised by this package."""


class DataError(GeorecError):
    """Problem with input data: missing files, malformed records, unknown
    contexts, or queries against contexts with no activity."""


class ConfigError(GeorecError):
    """Inconsistent or invalid configuration."""
