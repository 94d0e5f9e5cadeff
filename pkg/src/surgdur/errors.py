"""Exception types shared across the package.

ValidationError maps to CLI exit code 2, DatasetIOError to exit code 3.
"""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class DatasetIOError(OSError):
    """Raised when an on-disk dataset is missing, truncated or inconsistent."""
