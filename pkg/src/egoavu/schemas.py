"""Schema registry and tolerant JSON extraction for model outputs.

Models wrap JSON in prose, code fences, or leave trailing commas; the
extractor tries a fenced block first, then the first balanced top-level
value, then the whole text. Validation runs against the JSON Schema
documents shipped under ``egoavu/schema_docs/``.
"""

from __future__ import annotations

import json
import re
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema

from .errors import ConfigurationError, StructuredOutputError

SCHEMA_IDS = ("mcg/v1", "fusion/v1", "ssa/v1", "avh/v1", "tr/v1", "tr-mcq/v1", "judge/v1")

_FENCE_RE = re.compile(r"```(?:json)?\s*\n?(.*?)```", re.DOTALL)


@lru_cache(maxsize=None)
def load_schema(schema_id: str) -> dict[str, Any]:
    if schema_id not in SCHEMA_IDS:
        raise ConfigurationError(f"unknown schema id: {schema_id!r}")
    filename = schema_id.replace("/", ".") + ".json"
    document = resources.files("egoavu").joinpath("schema_docs", filename)
    with document.open("r", encoding="utf-8") as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def _validator(schema_id: str) -> jsonschema.Draft202012Validator:
    return jsonschema.Draft202012Validator(load_schema(schema_id))


def validate(schema_id: str, value: Any) -> list[str]:
    """Return one human-readable violation per offending path (empty = valid)."""
    problems = []
    for error in sorted(_validator(schema_id).iter_errors(value), key=lambda e: e.json_path):
        problems.append(f"{error.json_path}: {error.message}")
    return problems


def strip_trailing_commas(text: str) -> str:
    """Remove commas directly before a closing bracket, outside strings."""
    out: list[str] = []
    in_string = False
    escaped = False
    for ch in text:
        if in_string:
            out.append(ch)
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
            out.append(ch)
            continue
        if ch in "]}":
            # Drop a dangling comma (and keep intervening whitespace).
            k = len(out) - 1
            while k >= 0 and out[k] in " \t\r\n":
                k -= 1
            if k >= 0 and out[k] == ",":
                del out[k]
        out.append(ch)
    return "".join(out)


def _try_load(text: str) -> Any | None:
    for candidate in (text, strip_trailing_commas(text)):
        try:
            return json.loads(candidate)
        except json.JSONDecodeError:
            continue
    return None


def _balanced_spans(text: str) -> list[str]:
    """Top-level balanced {...} / [...] substrings, string-aware."""
    spans = []
    depth = 0
    start = -1
    in_string = False
    escaped = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            if depth > 0:
                in_string = True
            continue
        if ch in "{[":
            if depth == 0:
                start = i
            depth += 1
        elif ch in "}]":
            if depth > 0:
                depth -= 1
                if depth == 0 and start >= 0:
                    spans.append(text[start:i + 1])
                    start = -1
    return spans


def extract_json_value(text: str) -> Any:
    """First parseable JSON value in fenced-block -> balanced-span -> whole-text order."""
    for fenced in _FENCE_RE.findall(text):
        value = _try_load(fenced.strip())
        if value is not None:
            return value
    for span in _balanced_spans(text):
        value = _try_load(span)
        if value is not None:
            return value
    value = _try_load(text.strip())
    if value is not None:
        return value
    raise StructuredOutputError("no JSON value found in response", raw_text=text)


def parse_structured(text: str, schema_id: str) -> Any:
    """Extract and validate in one step; raises with every offending path."""
    value = extract_json_value(text)
    problems = validate(schema_id, value)
    if problems:
        raise StructuredOutputError(
            f"response violates schema {schema_id}: {'; '.join(problems)}",
            raw_text=text,
            diagnostics=problems,
        )
    return value
