"""Lexical diversity filtering over combined per-video narrations.

Videos whose enriched narration keeps repeating the same words (static
scenes, monotone activity) are cut before graph construction. The score is
the moving-average type-token ratio: the mean fraction of distinct tokens
over every sliding window of ``w`` tokens.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass

from .errors import UndefinedScoreError

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 200
DEFAULT_TAU = 0.3
DEFAULT_DROP_FRACTION = 0.25

# Alphanumeric runs only: underscores and all punctuation act as separators.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric word tokens; empty input gives an empty list."""
    return _TOKEN_RE.findall(text.lower())


def mattr(tokens: list[str], w: int = DEFAULT_WINDOW) -> float:
    """Mean distinct-token fraction over all sliding windows of size w.

    Sequences shorter than w score as the plain type-token ratio (the w -> n
    limit of the windowed score). Raises for an empty sequence, where the
    ratio is undefined.
    """
    if w < 1:
        raise UndefinedScoreError(f"window size must be >= 1, got {w}")
    n = len(tokens)
    if n == 0:
        raise UndefinedScoreError("cannot score an empty token sequence")
    if n < w:
        return len(set(tokens)) / n

    counts: dict[str, int] = {}
    distinct = 0
    total = 0
    for i, tok in enumerate(tokens):
        if counts.get(tok, 0) == 0:
            distinct += 1
        counts[tok] = counts.get(tok, 0) + 1
        if i >= w:
            old = tokens[i - w]
            counts[old] -= 1
            if counts[old] == 0:
                distinct -= 1
        if i >= w - 1:
            total += distinct
    return total / (w * (n - w + 1))


@dataclass(frozen=True)
class DiversityScore:
    video_id: str
    token_count: int
    mattr: float
    retained: bool = False


def score_video(video_id: str, combined_text: str, w: int = DEFAULT_WINDOW) -> DiversityScore:
    """Score one video's combined narration (captions plus action lines)."""
    tokens = tokenize(combined_text)
    return DiversityScore(video_id=video_id, token_count=len(tokens), mattr=mattr(tokens, w))


def select_videos(
    scores: list[DiversityScore],
    tau: float = DEFAULT_TAU,
    drop_fraction: float = DEFAULT_DROP_FRACTION,
) -> set[str]:
    """Retain diverse videos: score above tau, capped to the top quantile.

    Whenever more than ceil((1 - drop_fraction) * N) videos clear the
    absolute threshold, the effective cutoff rises to the drop_fraction
    quantile so at least that share of the distribution is removed. Ties are
    broken by video_id, so the result is independent of input order.
    """
    if not scores:
        return set()
    above = [s for s in scores if s.mattr > tau]
    if not above:
        logger.warning("diversity filter retained no videos: all %d scores <= %.3f", len(scores), tau)
        return set()
    cap = math.ceil((1.0 - drop_fraction) * len(scores))
    if len(above) > cap:
        above = sorted(above, key=lambda s: (-s.mattr, s.video_id))[:cap]
    return {s.video_id for s in above}


def apply_selection(scores: list[DiversityScore], retained: set[str]) -> list[DiversityScore]:
    marked = [DiversityScore(s.video_id, s.token_count, s.mattr, s.video_id in retained) for s in scores]
    return marked
