"""Exception types shared across the package."""


class WellSpreadError(Exception):
    """Base class for all package errors."""

    reason = "error"


class InvalidDimensionError(WellSpreadError, ValueError):
    reason = "invalid-dimension"


class DomainError(WellSpreadError, ValueError):
    reason = "domain"


class ResourceLimitError(WellSpreadError, RuntimeError):
    """Raised when an exhaustive enumeration or dense build exceeds its guard."""

    reason = "resource-limit"

    def __init__(self, message, count=None, limit=None):
        super().__init__(message)
        self.count = count
        self.limit = limit
