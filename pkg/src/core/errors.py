"""Exception hierarchy shared by every module."""


class KnapsackError(Exception):
    """Base class for package errors."""


class DomainError(KnapsackError, ValueError):
    """A precondition or domain constraint was violated."""


class SizeError(DomainError):
    """An exhaustive search was asked to enumerate beyond its cap."""


class InstanceFormatError(KnapsackError, ValueError):
    """An instance file could not be parsed or validated."""


class InvariantViolation(KnapsackError, AssertionError):
    """A produced object broke an internal invariant."""
