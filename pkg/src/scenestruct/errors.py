"""Exception types shared across the package."""


class ScenestructError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ScenestructError):
    """Invalid configuration or an incompatible combination of options."""


class DataError(ScenestructError):
    """Corpus or prediction data violates the documented format."""


class CheckpointError(ScenestructError):
    """Checkpoint file missing, malformed, or incompatible with the request."""
