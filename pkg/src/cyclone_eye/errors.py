"""Exception hierarchy shared across the package."""


class CycloneEyeError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(CycloneEyeError, ValueError):
    """A fuzzy system or run configuration is malformed or inconsistent."""


class RangeError(CycloneEyeError, ValueError):
    """A value lies outside the domain the operation accepts."""


class NoRuleFiredError(CycloneEyeError):
    """Every rule fired with zero strength, so there is nothing to defuzzify."""


class NoMassError(CycloneEyeError):
    """A binary image has no foreground pixel."""


class UnsupportedLatitudeError(RangeError):
    pass


class UndefinedErrorPercentage(RangeError):
    pass


class AlignmentError(CycloneEyeError):
    """Two tracks cannot be paired point by point."""

    def __init__(self, message, orphans=()):
        super().__init__(message)
        self.orphans = tuple(orphans)


class OrderingError(CycloneEyeError, ValueError):
    """Timestamps are not strictly increasing."""
