"""Fuse per-clip channels into unified narrations.

The clip-level fusion turns enriched captions plus the context graph into
one past-tense paragraph; the video-level pass folds every clip paragraph
into a single dense narration with embedded timestamps.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Any

from .errors import DenseFusionError, FusionError, GatewayError, StructuredOutputError
from .enrichment import EnhancedNarrations
from .gateway import DecodeParams, GatewayClient, user_request
from .mcg import MultiModalContextGraph
from .prompts import render_dense_prompt, render_fusion_prompt

logger = logging.getLogger(__name__)

DENSE_CHUNK_S = 10.0

_TIMESTAMP_RE = re.compile(r"\d+(?:\.\d+)?\s*seconds?", re.IGNORECASE)
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class FusedNarration:
    clip_id: str
    caption: str          # one paragraph, past tense
    source_graph: str     # clip_id of the graph it was fused from


@dataclass(frozen=True)
class DenseNarration:
    video_id: str
    caption: str
    covered_span: tuple[float, float]


def collapse_paragraph(text: str) -> str:
    """Fold any internal line breaks into spaces (single-paragraph contract)."""
    return re.sub(r"\s*\n\s*", " ", text.strip())


def fuse_clip(
    client: GatewayClient,
    model_id: str,
    enhanced: EnhancedNarrations,
    graph: MultiModalContextGraph,
    *,
    decode: DecodeParams | None = None,
    max_repair: int = 1,
) -> FusedNarration:
    """Generate the unified audio-visual caption for one clip."""
    prompt = render_fusion_prompt(enhanced.video_caption, enhanced.action_narration, graph.to_dict())
    request = user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0))
    try:
        value = client.complete_structured(request, "fusion/v1", max_repair=max_repair)
    except (StructuredOutputError, GatewayError) as exc:
        raise FusionError(f"fusion failed for clip {enhanced.clip_id}: {exc}") from exc
    caption = collapse_paragraph(value["caption"])
    if not caption:
        raise FusionError(f"fusion produced an empty caption for clip {enhanced.clip_id}")
    return FusedNarration(clip_id=enhanced.clip_id, caption=caption, source_graph=graph.clip_id)


def chunk_caption_entries(fused_with_spans: list[tuple[FusedNarration, tuple[float, float]]]) -> list[dict[str, Any]]:
    """Split clip captions into ~10 s timestamped entries for the dense pass.

    A clip longer than one chunk distributes its caption sentences evenly
    and contiguously across its 10 s sub-spans; clips at the minimum length
    pass through as a single entry. Deterministic by construction.
    """
    entries: list[dict[str, Any]] = []
    for fused, (start, end) in fused_with_spans:
        duration = end - start
        n_chunks = max(1, int(duration // DENSE_CHUNK_S) + (1 if duration % DENSE_CHUNK_S > 1e-9 else 0))
        sentences = [s for s in _SENTENCE_RE.split(fused.caption) if s.strip()]
        if n_chunks == 1 or len(sentences) <= 1:
            entries.append({"start_time": start, "end_time": end, "caption": fused.caption})
            continue
        n_chunks = min(n_chunks, len(sentences))
        base, extra = divmod(len(sentences), n_chunks)
        step = duration / n_chunks
        cursor = 0
        for k in range(n_chunks):
            take = base + (1 if k < extra else 0)
            chunk_text = " ".join(sentences[cursor:cursor + take])
            cursor += take
            entries.append({
                "start_time": round(start + k * step, 3),
                "end_time": round(start + (k + 1) * step, 3) if k < n_chunks - 1 else end,
                "caption": chunk_text,
            })
    return entries


def fuse_dense(
    client: GatewayClient,
    model_id: str,
    video_id: str,
    fused_with_spans: list[tuple[FusedNarration, tuple[float, float]]],
    *,
    decode: DecodeParams | None = None,
) -> DenseNarration:
    """Aggregate a video's clip captions into one timestamped paragraph.

    Output is plain text (the dense prompt forbids JSON); the caption must
    mention at least one timestamp in seconds.
    """
    if not fused_with_spans:
        raise DenseFusionError(f"no clip captions available for video {video_id}")
    ordered = sorted(fused_with_spans, key=lambda pair: pair[1][0])
    entries = chunk_caption_entries(ordered)
    prompt = render_dense_prompt(entries)
    request = user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0))
    try:
        response = client.complete(request)
    except GatewayError as exc:
        raise DenseFusionError(f"dense narration failed for video {video_id}: {exc}") from exc
    caption = collapse_paragraph(response.text)
    if not caption:
        raise DenseFusionError(f"dense narration empty for video {video_id}")
    if not _TIMESTAMP_RE.search(caption):
        raise DenseFusionError(f"dense narration for video {video_id} cites no timestamp in seconds")
    covered = (min(span[0] for _, span in ordered), max(span[1] for _, span in ordered))
    return DenseNarration(video_id=video_id, caption=caption, covered_span=covered)
