"""Exception types shared across the package."""


class LdrNetError(Exception):
    """Base class for every error this package raises deliberately."""


class DimensionError(LdrNetError, ValueError):
    """Shapes or sizes are incompatible with the requested operation."""


class DomainError(LdrNetError, ValueError):
    """A value lies outside the domain an operation is defined on."""


class ConfigError(LdrNetError, ValueError):
    """Invalid configuration file, key, or override."""


class ManifestError(LdrNetError, ValueError):
    """Malformed dataset manifest."""


class DecodeError(LdrNetError, ValueError):
    """A file could not be decoded (image, feature file, or checkpoint)."""


class UnsupportedConfigurationError(LdrNetError, ValueError):
    """The operation is not defined for the supplied configuration."""


class GradientCacheError(LdrNetError, ValueError):
    """Backward pass invoked with a cache from a different forward pass."""
