"""Exception types shared across the package."""

from __future__ import annotations


class ResScopeError(Exception):
    """Base class for all package errors."""


class DomainError(ResScopeError, ValueError):
    """A parameter lies outside the range where an operation is defined."""


class CapacityError(ResScopeError, MemoryError):
    """A request would exceed the configured memory or enumeration budget."""


class EmptyRangeError(ResScopeError, ValueError):
    """A discriminant range contains no fundamental discriminants."""
