"""Versioned newline-delimited record files.

Every internal record file starts with a plain-text header line
``format: <format-id>`` followed by one JSON object per line. Writers are
atomic (temp file + rename) or append-only with torn-line recovery, so a
killed run can always resume from a consistent prefix.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import ParseError

logger = logging.getLogger(__name__)

HEADER_PREFIX = "format: "

FORMAT_INGEST = "egoavu-ingest/1"
FORMAT_CLIPS = "egoavu-clips/1"
FORMAT_ENRICHED = "egoavu-enriched/1"
FORMAT_DIVERSITY = "egoavu-diversity/1"
FORMAT_MCG = "egoavu-mcg/1"
FORMAT_FUSED = "egoavu-fused/1"
FORMAT_DENSE = "egoavu-dense/1"
FORMAT_QA = "egoavu-qa/1"


def dumps_record(row: dict[str, Any]) -> str:
    """Serialize one record with a stable key order (byte-reproducible)."""
    return json.dumps(row, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_records(path: str | Path, format_id: str, rows: Iterable[dict[str, Any]]) -> int:
    """Atomically write a header line plus one JSON record per line.

    Returns the number of records written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(f"{HEADER_PREFIX}{format_id}\n")
            for row in rows:
                fh.write(dumps_record(row) + "\n")
                count += 1
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return count


def read_header(path: str | Path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if not first.startswith(HEADER_PREFIX):
        raise ParseError(f"{path}: missing format header line", line=1)
    return first[len(HEADER_PREFIX):].strip()


def iter_records(path: str | Path, expected_format: str) -> Iterator[dict[str, Any]]:
    """Yield records, validating the header against ``expected_format``."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(HEADER_PREFIX):
            raise ParseError(f"{path}: missing format header line", line=1)
        found = first[len(HEADER_PREFIX):].strip()
        if found != expected_format:
            raise ParseError(f"{path}: format {found!r}, expected {expected_format!r}", line=1)
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: invalid record: {exc.msg}", line=lineno) from exc


def read_records(path: str | Path, expected_format: str) -> list[dict[str, Any]]:
    return list(iter_records(path, expected_format))


def recover_append_file(path: str | Path, format_id: str) -> list[dict[str, Any]]:
    """Open-or-repair an append-mode record file and return its valid rows.

    A crash can leave a torn trailing line; it is dropped (the row will be
    regenerated). A missing file is created with just the header.
    """
    path = Path(path)
    if not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{HEADER_PREFIX}{format_id}\n")
        return []

    raw = path.read_text(encoding="utf-8")
    lines = raw.split("\n")
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise ParseError(f"{path}: missing format header line", line=1)
    found = lines[0][len(HEADER_PREFIX):].strip()
    if found != format_id:
        raise ParseError(f"{path}: format {found!r}, expected {format_id!r}", line=1)

    # Trailing newline means the final element of split() is "".
    complete_through = len(lines) - 1
    torn = lines[-1] != ""
    rows: list[dict[str, Any]] = []
    for idx in range(1, complete_through):
        line = lines[idx].strip()
        if not line:
            continue
        rows.append(json.loads(line))
    if torn:
        logger.warning("%s: dropping torn trailing line after crash", path)
        kept = "\n".join(lines[:complete_through]) + "\n"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(kept)
    return rows


class RecordAppender:
    """Append records one at a time with per-line durability."""

    def __init__(self, path: str | Path, format_id: str):
        self.path = Path(path)
        self.format_id = format_id
        self.existing = recover_append_file(self.path, format_id)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, row: dict[str, Any]) -> None:
        self._fh.write(dumps_record(row) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "RecordAppender":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def write_jsonl(path: str | Path, rows: Iterable[dict[str, Any]]) -> int:
    """Plain JSONL without a header (exported splits, responses)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(dumps_record(row) + "\n")
                count += 1
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return count


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: invalid JSONL: {exc.msg}", line=lineno) from exc
    return rows
