"""Exception hierarchy.

Public functions never raise a bare ValueError; callers can catch
SmartDcaError to handle anything this package objects to, or one of the
subclasses to map failures onto CLI exit codes / HTTP statuses.
"""


class SmartDcaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SmartDcaError, ValueError):
    """Numeric input violates a documented precondition (sign, finiteness, range)."""


class DataError(SmartDcaError, ValueError):
    """A price series or data file is malformed; message names the offending row."""


class ConfigError(SmartDcaError, ValueError):
    """A run configuration is invalid or incomplete."""


class InvestmentCapError(SmartDcaError, OverflowError):
    """A strategy asked for more cash than the configured cap allows.

    Unbounded variants blow up on very low prices; this is surfaced as an
    explicit error instead of silently saturating.
    """


class CounterexampleNotFound(SmartDcaError, RuntimeError):
    """A deterministic witness search exhausted its grid without success.

    This would indicate a defect in the mean implementations, not in the
    underlying theory, so it is a distinct loud failure.
    """
