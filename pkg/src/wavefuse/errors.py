"""Exception hierarchy shared by the library and the CLI."""


class WaveFuseError(Exception):
    """Base class for all wavefuse errors."""


class ShapeError(WaveFuseError, ValueError):
    """Tensor shapes are inconsistent with an operation's contract."""


class DataError(WaveFuseError, ValueError):
    """Input values or files are malformed (non-finite data, bad headers, ...)."""


class ConfigError(WaveFuseError, ValueError):
    """A configuration is invalid. The message names the offending key."""
