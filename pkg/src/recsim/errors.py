"""Exception hierarchy shared across the simulator."""


class RecsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RecsimError):
    """Invalid configuration value or malformed config file."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        prefix = ""
        if field is not None:
            prefix += f"[{field}] "
        if line is not None:
            prefix += f"(line {line}) "
        super().__init__(prefix + message)


class UsageError(RecsimError):
    """Caller violated an operation precondition (bad argument, unknown algorithm)."""


class FitError(RecsimError):
    """Least-squares fit could not be performed (e.g. too few rows)."""


class DataError(RecsimError):
    """Stored or in-memory simulation data is incomplete or inconsistent."""


class InternalError(RecsimError):
    """Internal consistency violation; indicates a bug, not a user error."""
