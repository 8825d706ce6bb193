"""Exception types shared across the package."""


class SplabError(Exception):
    pass


class DimensionError(SplabError, ValueError):
    """Operands have incompatible lengths or shapes."""


class ConfigError(SplabError, ValueError):
    """A configuration constraint is violated.

    The message always names the constraint that failed.
    """


class ConfigSyntaxError(ConfigError):
    """The configuration text itself could not be parsed."""


class DomainError(SplabError, ValueError):
    """An analytical formula was called outside its domain."""


class OutOfRangeError(SplabError, ValueError):
    """A scalar input lies outside the encoder's [val_min, val_max]."""


class SnapshotError(SplabError):
    """A snapshot file could not be read."""


class SnapshotVersionError(SnapshotError):
    pass
