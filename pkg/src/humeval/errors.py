"""Exception types shared across the platform.

The HTTP layer maps these onto status codes; everything below it raises
plain exceptions and stays transport-agnostic.
"""


class HumevalError(Exception):
    """Base class for all platform errors."""


class CampaignParseError(HumevalError):
    """Campaign file is not well-formed (syntax level).

    Carries the 1-based line/column when the underlying decoder provides them.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class CampaignValidationError(HumevalError):
    """Campaign file is well-formed but violates the schema.

    `path` names the offending location, e.g. "info.protocol" or
    "data[0][1].tgt".
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class AuthorizationError(HumevalError):
    """Token is unknown or has the wrong role for the endpoint."""


class ConflictError(HumevalError):
    """Duplicate submission for an item the user already completed."""


class ConfigurationError(HumevalError):
    """Assignment parameters are inconsistent with the campaign data."""


class UnsupportedModeError(HumevalError):
    """Operation requested for an assignment mode that does not support it."""


class StateError(HumevalError):
    """Operation requested in a state where it is not defined."""


class NotFoundError(HumevalError):
    """Referenced campaign or resource does not exist."""


class InputError(HumevalError):
    """Numeric routine received arguments outside its domain."""


class LogCorruptionError(HumevalError):
    """A non-trailing log record failed its integrity check."""

    def __init__(self, message: str, sequence: int | None = None):
        self.sequence = sequence
        super().__init__(message)
