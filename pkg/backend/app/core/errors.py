from __future__ import annotations


class JNLabError(Exception):
    """Base class for every error raised by the library."""


class DomainError(JNLabError, ValueError):
    pass


class SizeLimitError(JNLabError, ValueError):
    def __init__(self, what: str, requested: int, limit: int):
        super().__init__(f"{what}: n={requested} exceeds the limit {limit}")
        self.what = what
        self.requested = requested
        self.limit = limit


class PrecisionUnavailableError(JNLabError, ValueError):
    def __init__(self, requested: int, limit: int):
        super().__init__(f"pi precision of {requested} digits is unavailable (1..{limit})")
        self.requested = requested
        self.limit = limit


class InsufficientDataError(JNLabError, ValueError):
    pass


class InvariantViolation(JNLabError):
    """A postcondition of a verified claim does not hold."""

    def __init__(self, message: str, claim: str = ""):
        super().__init__(message)
        self.claim = claim
