"""Exception types shared across the package."""


class DelsimError(Exception):
    """Base class for all package errors."""


class UsageError(DelsimError):
    """The caller passed structurally invalid input (bad arguments, malformed
    models, formulas outside the accepted fragment, ...)."""


class SchemaError(UsageError):
    """A file failed schema validation; the message carries file and path
    context."""


class InternalConsistencyError(DelsimError):
    """An internal cross-check failed (e.g. a synthesized obstruction did not
    verify). Indicates a bug, not a usage problem."""
