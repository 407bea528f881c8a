"""Exception hierarchy shared by every estimator and the CLI."""


class SmoothCountError(Exception):
    """Base class for all package errors."""


class BudgetExceeded(SmoothCountError):
    """Exact counting would cost more than the configured work budget."""


class NeedsPrecompute(SmoothCountError):
    """A coefficient table row required for the estimate is missing."""


class ResourceError(SmoothCountError):
    """A precomputation would exceed the configured memory cap."""


class CorruptTable(SmoothCountError):
    """A persisted table failed to parse or failed its integrity check."""


class UnsupportedVersion(CorruptTable):
    """A persisted table carries an unknown format version."""


class NoConvergence(SmoothCountError):
    """Newton iteration left the admissible interval or ran too long."""


class OutOfRange(SmoothCountError, ValueError):
    """An argument lies outside the range a table or function covers."""


class InsufficientPrecision(SmoothCountError):
    """A persisted table was built with fewer digits than the caller requires."""
