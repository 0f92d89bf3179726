"""Shared exception base and the handful of errors used across modules."""


class CourseforgeError(Exception):
    """Base class for every domain error raised by this package."""


class InvalidDocument(CourseforgeError):
    """A domain document violates one of its declared invariants."""


class UnknownRun(CourseforgeError):
    """No run with the given id exists under the run root."""
