"""Line-oriented bibliographic template parser and serializer.

Grammar (total over arbitrary text; malformed regions become diagnostics,
never exceptions):

* ``Name: value`` lines; field names are case-insensitive and stored
  lowercase; duplicate names are permitted and order is preserved.
* Continuation lines start with a space or tab and are appended,
  space-joined, to the previous field's value.
* Blank lines are ignored.
* A template region spans from one ``Template-Type:`` line to the next one
  (or EOF). ``Handle:`` is mandatory and must appear exactly once.
* Text before the first region yields a single "preamble ignored"
  diagnostic when non-blank.
* Author clusters open at each ``Author-Name`` field and absorb subsequent
  ``Author-*`` fields until the next ``Author-Name``.

The serializer emits one ``name: value`` line per field, in source order,
with one blank line between templates. ``serialize -> parse`` is the
identity on parsed templates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import MalformedHandle
from .handles import Handle, validate_handle

_FIELD_RE = re.compile(r"^([A-Za-z][A-Za-z0-9-]*):(.*)$")

TEMPLATE_TYPE_FIELD = "template-type"
HANDLE_FIELD = "handle"


@dataclass(frozen=True)
class Diagnostic:
    location: str
    message: str

    def as_dict(self) -> dict:
        return {"location": self.location, "message": self.message}


@dataclass(frozen=True)
class AuthorCluster:
    name: str
    email: str | None = None
    workplace: str | None = None


@dataclass
class RedifTemplate:
    """One parsed template: promoted type/handle plus the raw field list.

    ``fields`` holds every field in source order, including the
    ``template-type`` and ``handle`` lines, so serialization preserves
    layout exactly.
    """

    template_type: str
    handle: Handle
    fields: list[tuple[str, str]]
    author_clusters: list[AuthorCluster] = field(default_factory=list)

    def first(self, name: str) -> str | None:
        """First value of a field, or None."""
        name = name.lower()
        for k, v in self.fields:
            if k == name:
                return v
        return None

    def all(self, name: str) -> list[str]:
        name = name.lower()
        return [v for k, v in self.fields if k == name]

    def structural_key(self) -> tuple:
        return (
            self.template_type,
            self.handle.key(),
            tuple(self.fields),
            tuple(self.author_clusters),
        )


def _classify(line: str) -> tuple[str, object]:
    """Classify one raw line: blank, continuation, field or junk."""
    if not line.strip():
        return ("blank", None)
    if line[0] in (" ", "\t"):
        return ("continuation", line.strip())
    m = _FIELD_RE.match(line)
    if m:
        return ("field", (m.group(1).lower(), m.group(2).strip()))
    return ("junk", line)


def _collect_clusters(fields: list[tuple[str, str]]) -> list[AuthorCluster]:
    clusters: list[AuthorCluster] = []
    current: dict | None = None
    for name, value in fields:
        if name == "author-name":
            if current is not None:
                clusters.append(AuthorCluster(**current))
            current = {"name": value, "email": None, "workplace": None}
        elif current is not None and name.startswith("author-"):
            if name == "author-email" and current["email"] is None:
                current["email"] = value
            elif name == "author-workplace-name" and current["workplace"] is None:
                current["workplace"] = value
    if current is not None:
        clusters.append(AuthorCluster(**current))
    return clusters


def _finish_region(
    fields: list[tuple[str, str]],
    start_line: int,
) -> tuple[RedifTemplate | None, Diagnostic | None]:
    """Build a template from a region's fields, or explain why not."""
    loc = f"line {start_line}"
    ttype = fields[0][1]
    if not ttype:
        return None, Diagnostic(loc, "empty Template-Type")
    handles = [v for k, v in fields if k == HANDLE_FIELD]
    if not handles:
        return None, Diagnostic(loc, "missing Handle")
    if len(handles) > 1:
        return None, Diagnostic(loc, "duplicate Handle")
    try:
        handle = validate_handle(handles[0])
    except MalformedHandle as exc:
        return None, Diagnostic(loc, f"malformed Handle: {exc.detail}")
    return (
        RedifTemplate(
            template_type=ttype,
            handle=handle,
            fields=list(fields),
            author_clusters=_collect_clusters(fields),
        ),
        None,
    )


def parse_redif_report(
    text: str,
) -> tuple[list[RedifTemplate], list[Diagnostic], int]:
    """Parse, also reporting how many template regions were seen.

    Returns (templates, diagnostics, region_count); region_count equals
    len(templates) plus the number of rejected-region diagnostics.
    """
    templates: list[RedifTemplate] = []
    diagnostics: list[Diagnostic] = []
    regions = 0

    preamble_dirty = False
    in_region = False
    region_fields: list[tuple[str, str]] = []
    region_start = 0
    region_bad: Diagnostic | None = None

    def close_region() -> None:
        nonlocal region_fields, region_bad
        if region_bad is not None:
            diagnostics.append(region_bad)
        else:
            template, diag = _finish_region(region_fields, region_start)
            if template is not None:
                templates.append(template)
            elif diag is not None:
                diagnostics.append(diag)
        region_fields = []
        region_bad = None

    for lineno, line in enumerate(text.splitlines(), start=1):
        kind, payload = _classify(line)
        if kind == "blank":
            continue
        is_region_start = kind == "field" and payload[0] == TEMPLATE_TYPE_FIELD
        if is_region_start:
            if in_region:
                close_region()
            in_region = True
            regions += 1
            region_start = lineno
            region_fields = [payload]
            continue
        if not in_region:
            preamble_dirty = True
            continue
        if region_bad is not None:
            continue
        if kind == "field":
            region_fields.append(payload)
        elif kind == "continuation":
            if region_fields:
                name, value = region_fields[-1]
                joined = f"{value} {payload}".strip()
                region_fields[-1] = (name, joined)
            else:
                region_bad = Diagnostic(
                    f"line {lineno}", "continuation without a preceding field"
                )
        else:
            region_bad = Diagnostic(f"line {lineno}", f"unparseable line: {line!r}")

    if in_region:
        close_region()
    if preamble_dirty:
        diagnostics.insert(0, Diagnostic("line 1", "preamble ignored"))
    return templates, diagnostics, regions


def parse_redif(text: str) -> tuple[list[RedifTemplate], list[Diagnostic]]:
    """Parse templates out of text. Total: never raises on any string."""
    templates, diagnostics, _ = parse_redif_report(text)
    return templates, diagnostics


def serialize_templates(templates: list[RedifTemplate]) -> str:
    """Render templates back to text in the normal form the parser emits."""
    blocks = []
    for t in templates:
        lines = [f"{name}: {value}".rstrip() for name, value in t.fields]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
