"""Exception types shared across the package."""


class BirdsEyeError(Exception):
    """Base class for all package errors."""


class DomainError(BirdsEyeError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DegenerateError(BirdsEyeError, ValueError):
    """Point configuration too degenerate to determine a unique solution."""


class HorizonError(BirdsEyeError, ValueError):
    """Pixel maps to (or beyond) the horizon; no finite ground point exists."""


class TeachError(BirdsEyeError, ValueError):
    """Teach-by-demonstration session cannot produce a valid region."""


class StreamError(BirdsEyeError, ValueError):
    """Pose stream violates its ordering contract."""


class ConfigError(BirdsEyeError, ValueError):
    """Configuration file or command is invalid."""
