"""Exception types shared across the toolkit.

Every failure the library raises deliberately derives from MaraugError so
the CLI can separate operational errors (exit 1) from programming bugs.
"""

from __future__ import annotations


class MaraugError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(MaraugError):
    """Two rasters that must share dimensions do not."""


class MalformedLineError(MaraugError):
    """A label or prediction line has the wrong field count or non-numeric fields."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OutOfRangeError(MaraugError):
    """A parsed value violates a box, class, or confidence invariant."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class RemapIncompleteError(MaraugError):
    """A class id in the merged-in dataset has no target in the remap."""


class IdCollisionError(MaraugError):
    """Two records would end up with the same image id."""


class MissingSourceError(MaraugError):
    """A source image or label named by the manifest does not exist."""


class DecodeFailureError(MaraugError):
    """A source image exists but cannot be decoded."""


class WriteFailureError(MaraugError):
    """An output image or label could not be written."""


class GroupMismatchError(MaraugError):
    """Two run reports do not cover the same groups."""


class EmptyGroupError(MaraugError):
    """A taxonomy group has no evaluated class."""
