"""Exception types shared across the package."""


class ApfError(Exception):
    """Base class for all package errors."""


class DataError(ApfError):
    """Malformed input data or a violated operation contract (exit code 2)."""


class InternalError(ApfError):
    """A broken internal invariant; indicates a bug, not bad input (exit code 3)."""
