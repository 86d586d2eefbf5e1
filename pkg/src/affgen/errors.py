"""Exception hierarchy shared by every module."""
from __future__ import annotations


class AffgenError(Exception):
    """Base class for all library errors."""


class DomainError(AffgenError, ValueError):
    """Input outside an operation's domain (bad index, grade or dimension)."""


class PreconditionError(AffgenError, ValueError):
    """Operation called in a configuration it does not handle."""


class RankDeficiencyError(AffgenError):
    """A set of vectors that must be independent is not.

    ``smallest`` is the smallest singular value relative to the largest;
    ``point`` is the base point when the failure happens on a field.
    """

    def __init__(self, message: str, smallest: float | None = None, point=None):
        super().__init__(message)
        self.smallest = smallest
        self.point = None if point is None else tuple(float(c) for c in point)


class RegionTooLargeError(AffgenError):
    """No single frame completion works on the whole sample region."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = None if point is None else tuple(float(c) for c in point)


class IntegrationDivergedError(AffgenError):
    """A state became non-finite during integration."""

    def __init__(self, message: str, step: int, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial
