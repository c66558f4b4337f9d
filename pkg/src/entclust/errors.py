"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli.EXIT_*), so commands can
fail closed with a category the caller can branch on.
"""


class EntclustError(Exception):
    """Base class for all package errors."""


class ConfigError(EntclustError):
    """A configuration value is missing, malformed, or out of range."""


class InputError(EntclustError):
    """Runtime input violates a precondition (shape, range, finiteness)."""


class DataError(EntclustError):
    """A data file failed to parse or validate against its descriptor."""


class TrainingError(EntclustError):
    """Training produced a non-finite objective or gradient."""
