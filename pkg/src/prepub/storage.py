"""Durable append-only record log and state snapshots.

Log framing: ``[4-byte BE length][payload][4-byte BE CRC32(payload)]`` with
UTF-8 JSON payloads. A torn or corrupt tail (the normal result of a crash
mid-append) is truncated back to the last intact record with a warning;
everything before it replays normally.

Snapshots are a JSON dump of the full engine state plus the sequence number
of the last record they cover, guarded by a SHA-256 digest. Recovery loads
the snapshot (if any) and replays only the log records after it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
import zlib
from pathlib import Path

from .errors import StorageCorruption

log = logging.getLogger(__name__)

_LEN = struct.Struct(">I")

LOG_NAME = "events.log"
SNAPSHOT_NAME = "snapshot.json"


def encode_record(record: dict) -> bytes:
    payload = json.dumps(record, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _LEN.pack(len(payload)) + payload + _LEN.pack(zlib.crc32(payload))


def decode_records(blob: bytes) -> tuple[list[dict], int]:
    """Decode as many intact records as possible.

    Returns (records, valid_byte_length); bytes past valid_byte_length are
    a torn or corrupt tail.
    """
    records: list[dict] = []
    pos = 0
    total = len(blob)
    while pos + 4 <= total:
        (length,) = _LEN.unpack_from(blob, pos)
        end = pos + 4 + length + 4
        if end > total:
            break
        payload = blob[pos + 4 : pos + 4 + length]
        (crc,) = _LEN.unpack_from(blob, pos + 4 + length)
        if zlib.crc32(payload) != crc:
            break
        try:
            records.append(json.loads(payload.decode("utf-8")))
        except (UnicodeDecodeError, json.JSONDecodeError):
            break
        pos = end
    return records, pos


class LogStore:
    """Single-writer framed record log on disk."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / LOG_NAME
        self._fh = None

    def read_all(self) -> list[dict]:
        """Read intact records, truncating any torn tail in place."""
        if not self.path.exists():
            return []
        blob = self.path.read_bytes()
        records, valid = decode_records(blob)
        if valid < len(blob):
            log.warning(
                "truncating %s: %d trailing bytes after last valid record",
                self.path,
                len(blob) - valid,
            )
            with open(self.path, "r+b") as fh:
                fh.truncate(valid)
        return records

    def append(self, record: dict) -> None:
        if self._fh is None:
            self._fh = open(self.path, "ab")
        self._fh.write(encode_record(record))
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    # --- snapshots ---

    @property
    def snapshot_path(self) -> Path:
        return self.directory / SNAPSHOT_NAME

    def write_snapshot(self, last_seq: int, state: dict) -> None:
        body = json.dumps(state, sort_keys=True, separators=(",", ":"))
        document = {
            "format": 1,
            "last_seq": last_seq,
            "sha256": hashlib.sha256(body.encode("utf-8")).hexdigest(),
            "state": state,
        }
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(document, sort_keys=True), encoding="utf-8")
        os.replace(tmp, self.snapshot_path)

    def read_snapshot(self) -> tuple[int, dict] | None:
        if not self.snapshot_path.exists():
            return None
        try:
            document = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise StorageCorruption(f"unreadable snapshot: {exc}")
        body = json.dumps(document.get("state"), sort_keys=True, separators=(",", ":"))
        if hashlib.sha256(body.encode("utf-8")).hexdigest() != document.get("sha256"):
            raise StorageCorruption("snapshot digest mismatch")
        return document["last_seq"], document["state"]
