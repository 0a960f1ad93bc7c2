"""Archive harvesting: enumerate ``.rdf`` resources, parse them and upsert
the results into the registry.

Transport is abstracted behind a fetcher so tests run against local
directories. File URLs (or bare paths) walk the tree recursively; HTTP
archives must expose a plain-text ``index.txt`` listing one relative path
per line. Files that are not valid UTF-8 are rejected whole with one
diagnostic rather than silently mis-decoded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlparse

import httpx

from .errors import UnreachableArchive, ValidationFailed
from .models import ITEM_KINDS, ScholarlyItem
from .redif import Diagnostic, RedifTemplate, parse_redif_report

_ARCHIVE_CODE_RE = re.compile(r"^[a-z0-9]+$")

_TYPE_RE = re.compile(r"^redif-([a-z]+)", re.IGNORECASE)

# Plain-text full texts arrive through this field at ingest time.
FULLTEXT_FIELD = "full-text"


@dataclass
class ArchiveDescriptor:
    archive_code: str
    base_url: str
    last_harvest: float | None = None

    def __post_init__(self):
        if not _ARCHIVE_CODE_RE.match(self.archive_code):
            raise ValidationFailed(
                f"archive code must be lowercase alphanumeric, got {self.archive_code!r}"
            )


@dataclass
class IngestReport:
    files_fetched: int = 0
    templates_parsed: int = 0
    templates_rejected: int = 0
    stored: int = 0
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "files_fetched": self.files_fetched,
            "templates_parsed": self.templates_parsed,
            "templates_rejected": self.templates_rejected,
            "stored": self.stored,
            "diagnostics": [d.as_dict() for d in self.diagnostics],
        }


class FileFetcher:
    """Recursive directory walk for file:// URLs and bare paths."""

    def __init__(self, base_url: str):
        parsed = urlparse(base_url)
        if parsed.scheme == "file":
            self.root = Path(parsed.path)
        else:
            self.root = Path(base_url)

    def list_resources(self) -> list[str]:
        if not self.root.is_dir():
            raise UnreachableArchive(f"no such directory: {self.root}")
        return sorted(
            str(p.relative_to(self.root)) for p in self.root.rglob("*") if p.is_file()
        )

    def fetch(self, name: str) -> bytes:
        return (self.root / name).read_bytes()


class HttpFetcher:
    """Index-file enumeration over plain HTTP(S)."""

    def __init__(self, base_url: str, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.client = client or httpx.Client(timeout=30)

    def list_resources(self) -> list[str]:
        try:
            response = self.client.get(f"{self.base_url}/index.txt")
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise UnreachableArchive(f"cannot enumerate {self.base_url}: {exc}")
        return [line.strip() for line in response.text.splitlines() if line.strip()]

    def fetch(self, name: str) -> bytes:
        response = self.client.get(f"{self.base_url}/{name}")
        response.raise_for_status()
        return response.content


def make_fetcher(base_url: str):
    scheme = urlparse(base_url).scheme
    if scheme in ("http", "https"):
        return HttpFetcher(base_url)
    return FileFetcher(base_url)


def template_to_item(
    template: RedifTemplate, archive_code: str
) -> ScholarlyItem | Diagnostic:
    """Map a parsed template onto a registry item, or say why it cannot be."""
    match = _TYPE_RE.match(template.template_type)
    kind = match.group(1).lower() if match else None
    if kind not in ITEM_KINDS:
        return Diagnostic(
            template.handle.raw, f"unsupported template type {template.template_type!r}"
        )
    title = (template.first("title") or "").strip()
    if not title:
        return Diagnostic(template.handle.raw, "missing or empty Title")
    return ScholarlyItem(
        handle=template.handle,
        title=title,
        kind=kind,
        abstract=template.first("abstract"),
        fulltext=template.first(FULLTEXT_FIELD),
        author_names=[c.name for c in template.author_clusters],
        archive_code=archive_code,
    )


def harvest_archive(engine, descriptor: ArchiveDescriptor, fetcher=None) -> IngestReport:
    """Parse every ``.rdf`` resource under the archive into the registry.

    Per-file fetch or decode failures become diagnostics; only a failed
    enumeration aborts. Re-running over unchanged content changes nothing:
    upserts of identical items are dropped before they reach the log.
    """
    fetcher = fetcher or make_fetcher(descriptor.base_url)
    report = IngestReport()
    for name in fetcher.list_resources():
        if not name.endswith(".rdf"):
            continue
        try:
            blob = fetcher.fetch(name)
        except Exception as exc:
            report.diagnostics.append(Diagnostic(name, f"fetch failed: {exc}"))
            continue
        report.files_fetched += 1
        try:
            text = blob.decode("utf-8")
        except UnicodeDecodeError as exc:
            report.diagnostics.append(Diagnostic(name, f"invalid UTF-8: {exc}"))
            continue
        templates, diagnostics, regions = parse_redif_report(text)
        report.templates_parsed += len(templates)
        report.templates_rejected += regions - len(templates)
        report.diagnostics.extend(
            Diagnostic(f"{name}:{d.location}", d.message) for d in diagnostics
        )
        for template in templates:
            result = template_to_item(template, descriptor.archive_code)
            if isinstance(result, Diagnostic):
                report.diagnostics.append(Diagnostic(f"{name}:{result.location}", result.message))
                continue
            if engine.upsert_item(result) != "unchanged":
                report.stored += 1
    return report
