"""Robust locators for selected text fragments.

An anchor stores the selected text verbatim plus up to 64 characters of
context on each side and the original character offset. Resolution against
a (possibly edited) document runs three stages:

1. exact match of the fragment at the stored offset;
2. scan of every exact occurrence, scored by context agreement (length of
   the common suffix of the stored prefix and common prefix of the stored
   suffix with the text around the occurrence); the unique best occurrence
   wins, a score tie is reported as ambiguous;
3. fuzzy scan: every window whose length is within 20% of the fragment
   length is compared by normalized edit-distance similarity
   ``1 - dist/max(len)``; the best window at or above 0.8 wins, ties
   resolved to the earliest start then shortest window.

Offsets are Unicode code-point positions. All functions are pure.

Threshold arithmetic uses exact fractions so that a window sitting exactly
on the 0.8 boundary is accepted on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidSpan, MalformedAnchor
from .handles import Handle, validate_handle

CONTEXT_CHARS = 64
FUZZY_THRESHOLD = 0.8
WINDOW_SLACK = 0.2

SOURCES = ("abstract", "fulltext")


@dataclass(frozen=True)
class FragmentAnchor:
    target: Handle
    source: str  # "abstract" or "fulltext"
    exact: str
    prefix: str
    suffix: str
    start_hint: int

    def as_dict(self) -> dict:
        return {
            "target": self.target.raw,
            "source": self.source,
            "exact": self.exact,
            "prefix": self.prefix,
            "suffix": self.suffix,
            "start_hint": self.start_hint,
        }


@dataclass(frozen=True)
class Span:
    start: int
    end: int


@dataclass(frozen=True)
class AmbiguousMatch:
    candidates: tuple[Span, ...]


@dataclass(frozen=True)
class NotFound:
    pass


def anchor_from_dict(data: dict) -> FragmentAnchor:
    """Validate the wire shape {target, source, exact, prefix, suffix, start_hint}."""
    try:
        target = validate_handle(data["target"])
        source = data["source"]
        exact = data["exact"]
        prefix = data["prefix"]
        suffix = data["suffix"]
        start_hint = data["start_hint"]
    except KeyError as exc:
        raise MalformedAnchor(f"missing field {exc.args[0]!r}")
    except Exception as exc:
        raise MalformedAnchor(str(exc))
    if source not in SOURCES:
        raise MalformedAnchor(f"source must be one of {SOURCES}, got {source!r}")
    if not isinstance(exact, str) or not exact:
        raise MalformedAnchor("exact must be a non-empty string")
    for name, value in (("prefix", prefix), ("suffix", suffix)):
        if not isinstance(value, str) or len(value) > CONTEXT_CHARS:
            raise MalformedAnchor(f"{name} must be a string of at most {CONTEXT_CHARS} chars")
    if not isinstance(start_hint, int) or isinstance(start_hint, bool) or start_hint < 0:
        raise MalformedAnchor("start_hint must be a non-negative integer")
    return FragmentAnchor(target, source, exact, prefix, suffix, start_hint)


def create_anchor(
    doc: str,
    start: int,
    end: int,
    target: Handle,
    source: str,
    context: int = CONTEXT_CHARS,
) -> FragmentAnchor:
    """Anchor the span doc[start:end] (character offsets, start < end)."""
    if source not in SOURCES:
        raise MalformedAnchor(f"source must be one of {SOURCES}, got {source!r}")
    if not (0 <= start < end <= len(doc)):
        raise InvalidSpan(f"span ({start}, {end}) invalid for document of length {len(doc)}")
    return FragmentAnchor(
        target=target,
        source=source,
        exact=doc[start:end],
        prefix=doc[max(0, start - context) : start],
        suffix=doc[end : end + context],
        start_hint=start,
    )


def _occurrences(doc: str, needle: str) -> list[int]:
    """All (possibly overlapping) start positions of needle in doc."""
    positions = []
    pos = doc.find(needle)
    while pos != -1:
        positions.append(pos)
        pos = doc.find(needle, pos + 1)
    return positions


def _context_score(doc: str, pos: int, length: int, prefix: str, suffix: str) -> int:
    """Agreement between stored context and text around doc[pos:pos+length]."""
    score = 0
    i = pos - 1
    j = len(prefix) - 1
    while i >= 0 and j >= 0 and doc[i] == prefix[j]:
        score += 1
        i -= 1
        j -= 1
    i = pos + length
    j = 0
    while i < len(doc) and j < len(suffix) and doc[i] == suffix[j]:
        score += 1
        i += 1
        j += 1
    return score


def _admissible_lengths(m: int, doc_len: int, slack: float) -> range:
    extent = int(m * slack)
    lo = max(1, m - extent)
    hi = min(doc_len, m + extent)
    return range(lo, hi + 1)


def _fuzzy_best(
    doc: str, exact: str, threshold: Fraction, slack: float
) -> Span | NotFound:
    """Exhaustive-equivalent scan for the best admissible window.

    One edit-distance table per start position yields the distance for
    every admissible window length at once; a column cutoff abandons
    starts that provably cannot reach the acceptance threshold. Results
    are identical to the naive scan over every (start, length) pair.
    """
    m = len(exact)
    n = len(doc)
    lengths = _admissible_lengths(m, n, slack)
    if len(lengths) == 0 or lengths[0] > n:
        return NotFound()
    min_len, max_len = lengths[0], lengths[-1]
    num, den = threshold.numerator, threshold.denominator

    best: tuple[int, int, int, int] | None = None  # (dist, max_side, start, length)

    def acceptable(dist: int, max_side: int) -> bool:
        # 1 - dist/max_side >= num/den
        return (max_side - dist) * den >= num * max_side

    def improves(dist: int, max_side: int) -> bool:
        if best is None:
            return True
        # 1 - dist/max_side > 1 - best_dist/best_max
        return dist * best[1] < best[0] * max_side

    # Largest distance that could still be accepted for any admissible length.
    max_side_cap = max(m, max_len)
    allow = (max_side_cap * (den - num)) // den

    for start in range(0, n - min_len + 1):
        limit = min(max_len, n - start)
        if limit < min_len:
            break
        prev = list(range(m + 1))
        for j in range(1, limit + 1):
            ch = doc[start + j - 1]
            cur = [j] + [0] * m
            row_min = j
            for i in range(1, m + 1):
                cost = 0 if exact[i - 1] == ch else 1
                v = min(prev[i] + 1, cur[i - 1] + 1, prev[i - 1] + cost)
                cur[i] = v
                if v < row_min:
                    row_min = v
            prev = cur
            if j >= min_len:
                dist = cur[m]
                max_side = max(m, j)
                if acceptable(dist, max_side) and improves(dist, max_side):
                    best = (dist, max_side, start, j)
            # Even shrinking by one per remaining column cannot reach allow.
            if row_min - (limit - j) > allow:
                break
    if best is None:
        return NotFound()
    return Span(best[2], best[2] + best[3])


def resolve_anchor(
    doc: str,
    anchor: FragmentAnchor,
    threshold: float = FUZZY_THRESHOLD,
    slack: float = WINDOW_SLACK,
) -> Span | AmbiguousMatch | NotFound:
    """Locate an anchor in (a possibly edited copy of) its document."""
    exact = anchor.exact
    m = len(exact)

    hint = anchor.start_hint
    if 0 <= hint <= len(doc) - m and doc[hint : hint + m] == exact:
        return Span(hint, hint + m)

    positions = _occurrences(doc, exact)
    if positions:
        scored = [
            (_context_score(doc, pos, m, anchor.prefix, anchor.suffix), pos)
            for pos in positions
        ]
        top = max(score for score, _ in scored)
        winners = [pos for score, pos in scored if score == top]
        if len(winners) > 1:
            return AmbiguousMatch(tuple(Span(p, p + m) for p in winners))
        return Span(winners[0], winners[0] + m)

    return _fuzzy_best(doc, exact, Fraction(str(threshold)), slack)
