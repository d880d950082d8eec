"""Exception types shared across the toolkit."""
from __future__ import annotations


class SineModelError(Exception):
    """Base class for all toolkit errors."""


class UsageError(SineModelError):
    """Bad arguments or malformed request (CLI exit code 2)."""


class AudioIOError(SineModelError):
    """Unreadable, unwritable or unsupported audio/CSV/JSON payload (CLI exit code 3)."""


class AnalysisError(SineModelError):
    """Analysis could not produce a usable result (CLI exit code 4)."""


class IllConditionedError(AnalysisError):
    """Least-squares system rejected; carries the offending condition number."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = float(condition)
