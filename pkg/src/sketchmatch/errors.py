"""Exception hierarchy shared by the library and the CLI."""


class SketchMatchError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SketchMatchError, ValueError):
    """Invalid parameters or configuration."""


class DataError(SketchMatchError, ValueError):
    """Input data that cannot be parsed or is inconsistent."""


class NumericError(SketchMatchError, ArithmeticError):
    """A numerical routine failed (no convergence, degenerate data)."""
