"""Exception hierarchy shared by the library and the CLI."""


class RLGSTError(Exception):
    """Base class for all package errors."""


class ValidationError(RLGSTError, ValueError):
    """Input violates a documented precondition."""


class DegenerateSystemError(RLGSTError):
    """The design system has no singular value above the threshold."""


class SchemaError(RLGSTError):
    """A file does not match the expected JSON schema."""
