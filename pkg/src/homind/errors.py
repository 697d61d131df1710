"""Exception hierarchy and desk-scale bounds."""

from __future__ import annotations

import os


class HomindError(Exception):
    """Base class for all library errors."""


class ValidationError(HomindError, ValueError):
    """An input violates a structural invariant or precondition."""


class ParseError(ValidationError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class LoopError(ValidationError):
    pass


class LabelRangeError(ValidationError):
    pass


class CapabilityError(HomindError):
    """The input exceeds a configured size bound."""


def bound(default: int) -> int:
    # HOMIND_MAX_N overrides every desk-scale bound at once
    raw = os.environ.get("HOMIND_MAX_N")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return default


def check_bound(size: int, default: int, what: str) -> None:
    limit = bound(default)
    if size > limit:
        raise CapabilityError(f"{what}: size {size} exceeds bound {limit} (set HOMIND_MAX_N to raise it)")
