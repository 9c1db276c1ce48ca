"""Answer extraction from free-form model responses.

Closed-ended grading never trusts a model to emit a bare label, so an
ordered pattern cascade pulls option letters and yes/no verdicts out of
arbitrary prose. The cascade is versioned: any change to the patterns or
their priorities must bump EXTRACTOR_VERSION, which is recorded in every
report. Both extractors are total functions; unparseable or ambiguous text
yields None (scored incorrect), never an exception.
"""

from __future__ import annotations

import re

EXTRACTOR_VERSION = "extractor/1"

CHOICE_LABELS = ("A", "B", "C", "D")

# Priority 1: explicit answer phrases anywhere in the text.
_CHOICE_EXPLICIT = re.compile(
    r"(?:final\s+answer|correct\s+answer|correct\s+option|answer|option)\s*"
    r"(?:is|:)\s*[*\"'(\[]*([A-Da-d])\b",
    re.IGNORECASE,
)

# Priority 2: the response leads with an option letter. A bare "A " is
# indistinguishable from the article, so "A" needs punctuation after it;
# B/C/D may stand alone.
_CHOICE_LEADING_PUNCT = re.compile(r"^\s*[*\"'(\[]*([A-Da-d])[)\].:,*\"']")
_CHOICE_LEADING_BARE = re.compile(r"^\s*([B-Db-d])(?:\s|$)")

# Priority 3: standalone uppercase letters anywhere (last resort).
_CHOICE_STANDALONE = re.compile(r"\b([A-D])\b")

_BINARY_LEADING = re.compile(r"^[^\w]*(yes|no)\b", re.IGNORECASE)
_BINARY_EXPLICIT = re.compile(
    r"answer\s*(?:is|:)?\s*(?:clearly|definitely|certainly|simply)?\s*[*\"'(\[]*(yes|no)\b",
    re.IGNORECASE,
)

_NO_PHRASES = (
    r"\bthere\s+is\s+no\b",
    r"\bthere\s+are\s+no\b",
    r"\bno\s+such\b",
    r"\bdoes\s+not\b",
    r"\bdid\s+not\b",
    r"\bis\s+not\s+(?:present|heard|visible|shown|mentioned)\b",
    r"\bcannot\s+be\s+(?:heard|seen)\b",
    r"\bcan't\s+be\s+(?:heard|seen)\b",
    r"\bnot\s+present\s+in\s+the\s+video\b",
    r"\bnever\s+(?:occurs|happens|appears)\b",
)
_YES_PHRASES = (
    r"\bthere\s+is\s+an?\b",
    r"\bthere\s+are\s+(?!no\b)",
    r"\bcan\s+be\s+heard\b",
    r"\bcan\s+be\s+seen\b",
    r"\bis\s+present\b",
    r"\bis\s+(?:heard|visible|audible)\b",
    r"\byou\s+can\s+hear\b",
    r"\bdoes\s+(?:occur|happen|appear)\b",
)
_NO_RE = re.compile("|".join(_NO_PHRASES), re.IGNORECASE)
_YES_RE = re.compile("|".join(_YES_PHRASES), re.IGNORECASE)


def _first_sentence(text: str) -> str:
    return re.split(r"[.!?\n]", text, maxsplit=1)[0]


def extract_choice(response: str) -> str | None:
    """Extract a multiple-choice label A-D, or None when absent/ambiguous."""
    if not isinstance(response, str) or not response:
        return None

    explicit = {m.group(1).upper() for m in _CHOICE_EXPLICIT.finditer(response)}
    if len(explicit) == 1:
        return explicit.pop()
    if len(explicit) > 1:
        return None

    lead = _CHOICE_LEADING_PUNCT.match(response) or _CHOICE_LEADING_BARE.match(response)
    if lead:
        return lead.group(1).upper()

    standalone = {m.group(1) for m in _CHOICE_STANDALONE.finditer(response)}
    if len(standalone) == 1:
        return standalone.pop()
    return None


def extract_binary(response: str) -> str | None:
    """Extract "yes" or "no", or None when absent or conflicting."""
    if not isinstance(response, str) or not response:
        return None

    opening = _first_sentence(response)
    opening_tokens = {t for t in re.findall(r"[a-z]+", opening.lower()) if t in ("yes", "no")}
    lead = _BINARY_LEADING.match(response)
    if lead:
        if len(opening_tokens) > 1:
            return None  # "Yes and no" style conflict
        return lead.group(1).lower()

    explicit = {m.group(1).lower() for m in _BINARY_EXPLICIT.finditer(response)}
    if len(explicit) == 1:
        return explicit.pop()
    if len(explicit) > 1:
        return None

    no_hit = _NO_RE.search(response) is not None
    yes_hit = _YES_RE.search(response) is not None
    if no_hit and not yes_hit:
        return "no"
    if yes_hit and not no_hit:
        return "yes"
    return None
