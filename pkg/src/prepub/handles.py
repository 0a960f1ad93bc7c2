"""RePEc-style handles: ``RePEc:<archive>:<series>:<id>``.

A handle has exactly four colon-separated non-empty segments. The first
segment is the literal ``RePEc`` (any case); the second names the archive.
Comparison is case-insensitive on the first two segments and case-sensitive
on the last two, so normalization canonicalizes only the first two.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MalformedHandle

SEGMENT_COUNT = 4


@dataclass(frozen=True)
class Handle:
    raw: str
    parts: tuple[str, str, str, str] = field(repr=False)

    @property
    def archive(self) -> str:
        return self.parts[1]

    def key(self) -> tuple[str, str, str, str]:
        """Comparison key: first two segments folded, last two verbatim."""
        p = self.parts
        return (p[0].lower(), p[1].lower(), p[2], p[3])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Handle):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        return self.raw


def validate_handle(raw: str) -> Handle:
    """Parse and normalize a raw handle string.

    Raises MalformedHandle naming the first violated rule:
    segment-count, empty-segment, whitespace, first-segment.
    """
    if not isinstance(raw, str):
        raise MalformedHandle("segment-count: handle must be a string")
    parts = raw.split(":")
    if len(parts) != SEGMENT_COUNT:
        raise MalformedHandle(
            f"segment-count: expected {SEGMENT_COUNT} colon-separated segments, got {len(parts)}"
        )
    for seg in parts:
        if not seg:
            raise MalformedHandle("empty-segment: all segments must be non-empty")
    for seg in parts:
        if any(ch.isspace() for ch in seg):
            raise MalformedHandle(f"whitespace: segment {seg!r} contains whitespace")
    if parts[0].lower() != "repec":
        raise MalformedHandle(f"first-segment: expected 'RePEc', got {parts[0]!r}")
    normalized = ("RePEc", parts[1].lower(), parts[2], parts[3])
    return Handle(raw=":".join(normalized), parts=normalized)


def is_valid_handle(raw: str) -> bool:
    try:
        validate_handle(raw)
        return True
    except MalformedHandle:
        return False
