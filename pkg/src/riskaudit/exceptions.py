"""Exception and warning types raised across riskaudit.

Each error class carries an ``exit_code`` so the command-line front end can
map failures onto its documented exit statuses without a lookup table.
"""


class AuditError(Exception):
    """Base class for every error raised by riskaudit."""

    exit_code = 1


class SchemaError(AuditError):
    """A mapped column is missing from the input header, or the mapping is invalid."""

    exit_code = 3

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class EmptyFileError(AuditError):
    """The input contained no bytes (not even a header row)."""

    exit_code = 3


class ParseError(AuditError):
    """A data row could not be parsed or violates a record invariant."""

    exit_code = 3

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ConfigError(AuditError, ValueError):
    """Invalid configuration: bins, simulation settings, policies, schema files."""

    exit_code = 2


class EmptySliceError(AuditError):
    """A required (group, outcome) slice of the data has no records."""

    exit_code = 4

    def __init__(self, message, group=None, outcome=None):
        super().__init__(message)
        self.group = group
        self.outcome = outcome


class DomainError(AuditError, ValueError):
    """A numeric argument lies outside the domain where a formula is defined."""

    exit_code = 4


class UndefinedRateError(AuditError):
    """A rate needed by a computation has a zero denominator."""

    exit_code = 4


class EmptyCohortWarning(UserWarning):
    """Filtering produced an empty dataset. Legal, but almost never intended."""


class InfeasibleRateWarning(UserWarning):
    """The error-rate identity produced a false positive rate above one."""
