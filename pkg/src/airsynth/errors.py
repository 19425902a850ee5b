"""Exception types shared across the pipeline."""


class AirsynthError(Exception):
    """Base class for all pipeline errors."""


class RejectionExhausted(AirsynthError):
    """Placement rejection sampling ran out of attempts (infeasible config)."""


class InvalidFov(AirsynthError):
    """Horizontal field of view outside (0, pi)."""


class OutOfRange(AirsynthError):
    """Trajectory evaluated outside [0, duration]."""


class SeverityRange(AirsynthError):
    """Weather severity outside [0, 1]."""


class EmptyMask(AirsynthError):
    """Instance mask contains no pixels."""


class UnknownId(AirsynthError):
    """Segmentation map contains an id absent from the scene's instance table."""


class BoxOutOfBounds(AirsynthError):
    """Pixel box does not fit the stated image dimensions."""


class InvalidTargets(AirsynthError):
    """Custom composition targets violate target invariants."""


class GenerationFailed(AirsynthError):
    """A composition target could not be realized."""


class LayoutInvalid(AirsynthError):
    """On-disk dataset layout is missing files or contains malformed lines."""


class EmptyStratum(AirsynthError):
    """A split stratum has too few images to partition."""


class ConfigError(AirsynthError):
    """CLI / config file could not be parsed or is inconsistent."""
