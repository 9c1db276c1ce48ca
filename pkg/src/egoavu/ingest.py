"""Narration corpus ingestion: timestamped narrations to clips.

Each narration timestamp becomes a symmetric window whose width is the
video's mean narration gap divided by the corpus-wide mean of those gaps.
Consecutive windows are then grouped into clips of bounded duration, and
videos without an audio track are dropped before any model call is spent.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from typing import BinaryIO, Iterable, TextIO

from .errors import ConfigurationError, DomainError, InsufficientDataError, ParseError
from .records import FORMAT_INGEST, HEADER_PREFIX

logger = logging.getLogger(__name__)

DEFAULT_MIN_CLIP_S = 10.0
DEFAULT_MAX_CLIP_S = 360.0

_EPS = 1e-9


@dataclass(frozen=True)
class NarrationRecord:
    """One timestamped narration line, e.g. ``#C C holds a cup`` at t=12.0."""

    video_id: str
    text: str
    timestamp: float

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ParseError(f"negative timestamp {self.timestamp} for video {self.video_id}")
        if not self.text.strip():
            raise ParseError(f"empty narration text for video {self.video_id}")


@dataclass(frozen=True)
class Segment:
    """A narration's temporal window, centred on its timestamp.

    ``beta`` is the video's mean gap between consecutive timestamps and
    ``alpha`` the corpus-wide mean of betas; the unclamped window width is
    exactly ``beta / alpha`` seconds.
    """

    narration_id: int
    video_id: str
    text: str
    timestamp: float
    start: float
    end: float
    beta: float
    alpha: float

    @property
    def width(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Clip:
    """A group of consecutive segments forming one processing unit."""

    clip_id: str
    video_id: str
    start: float
    end: float
    segments: tuple[Segment, ...]

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class VideoManifest:
    video_id: str
    media_locator: str
    has_audio: bool
    duration: float


@dataclass(frozen=True)
class ClipDiagnostic:
    """Why segments were dropped or merged during grouping."""

    code: str  # DROPPED_UNDERSIZED | DROPPED_OVERLAP | DROPPED_OVERSIZED | MERGED_TAIL
    video_id: str
    narration_ids: tuple[int, ...]
    message: str

    @property
    def is_drop(self) -> bool:
        return self.code.startswith("DROPPED")


def parse_narration_file(source: BinaryIO | TextIO | bytes | str, format_id: str) -> list[NarrationRecord]:
    """Parse a normalized narration export into records, preserving order.

    The only supported format id is ``egoavu-ingest/1``: a header line
    followed by one JSON object per line with keys video_id, text,
    timestamp_sec.
    """
    if format_id != FORMAT_INGEST:
        raise ConfigurationError(f"unknown ingestion format id: {format_id!r}")
    lines = _as_lines(source)
    header = lines[0] if lines else ""
    if header.strip() != f"{HEADER_PREFIX}{FORMAT_INGEST}":
        raise ParseError(f"expected header {HEADER_PREFIX}{FORMAT_INGEST!r}", line=1)
    out: list[NarrationRecord] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid narration record: {exc.msg}", line=lineno, offset=exc.colno) from exc
        try:
            out.append(NarrationRecord(str(row["video_id"]), str(row["text"]), float(row["timestamp_sec"])))
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", line=lineno) from exc
    return out


def parse_manifest_file(source: BinaryIO | TextIO | bytes | str) -> list[VideoManifest]:
    """Parse the manifest sidecar (same versioned header as the narrations)."""
    lines = _as_lines(source)
    header = lines[0] if lines else ""
    if header.strip() != f"{HEADER_PREFIX}{FORMAT_INGEST}":
        raise ParseError(f"expected header {HEADER_PREFIX}{FORMAT_INGEST!r}", line=1)
    out: list[VideoManifest] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid manifest record: {exc.msg}", line=lineno, offset=exc.colno) from exc
        try:
            manifest = VideoManifest(
                video_id=str(row["video_id"]),
                media_locator=str(row["media_locator"]),
                has_audio=bool(row["has_audio"]),
                duration=float(row["duration_sec"]),
            )
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", line=lineno) from exc
        if manifest.duration <= 0:
            raise ParseError(f"non-positive duration for video {manifest.video_id}", line=lineno)
        out.append(manifest)
    return out


def serialize_narrations(records: Iterable[NarrationRecord]) -> str:
    """Inverse of parse_narration_file (parse -> serialize -> parse is identity)."""
    lines = [f"{HEADER_PREFIX}{FORMAT_INGEST}"]
    for rec in records:
        lines.append(json.dumps(
            {"video_id": rec.video_id, "text": rec.text, "timestamp_sec": rec.timestamp},
            sort_keys=True, ensure_ascii=False,
        ))
    return "\n".join(lines) + "\n"


def _as_lines(source: BinaryIO | TextIO | bytes | str) -> list[str]:
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    return text.splitlines()


def sort_records(records: Iterable[NarrationRecord]) -> list[NarrationRecord]:
    """Stable sort by timestamp; input order breaks ties."""
    return sorted(records, key=lambda r: r.timestamp)


def compute_beta(timestamps: list[float]) -> float:
    """Mean gap between consecutive timestamps (requires >= 2, sorted)."""
    if len(timestamps) < 2:
        raise InsufficientDataError(f"need >= 2 timestamps to compute a mean gap, got {len(timestamps)}")
    gaps = [b - a for a, b in zip(timestamps, timestamps[1:])]
    return math.fsum(gaps) / len(gaps)


def compute_alpha(betas: list[float]) -> float:
    """Corpus-wide mean of per-video mean gaps."""
    if not betas:
        raise InsufficientDataError("no per-video gap means to average")
    return math.fsum(betas) / len(betas)


def segment_bounds(t: float, beta: float, alpha: float) -> tuple[float, float]:
    """Symmetric window around t with half-width beta / (2 * alpha).

    The start is clamped at 0; absent clamping the width is exactly
    beta / alpha and the midpoint is t.
    """
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if t < 0:
        raise DomainError(f"timestamp must be non-negative, got {t}")
    half = beta / (2.0 * alpha)
    return max(0.0, t - half), t + half


def derive_segments(
    records: list[NarrationRecord],
    alpha: float,
    beta: float,
    *,
    duration: float | None = None,
    start_id: int = 0,
) -> list[Segment]:
    """Build windows for one video's sorted narrations.

    When a manifest duration is known, window ends are clamped to it so no
    media range is ever requested past the end of the video.
    """
    segments = []
    for offset, rec in enumerate(sort_records(records)):
        start, end = segment_bounds(rec.timestamp, beta, alpha)
        if duration is not None:
            end = min(end, duration)
            start = min(start, end)
        segments.append(Segment(
            narration_id=start_id + offset,
            video_id=rec.video_id,
            text=rec.text,
            timestamp=rec.timestamp,
            start=start,
            end=end,
            beta=beta,
            alpha=alpha,
        ))
    return segments


def video_betas(records_by_video: dict[str, list[NarrationRecord]]) -> dict[str, float | None]:
    """Per-video mean gap; None marks videos that need the corpus fallback.

    Videos with a single narration (or whose timestamps coincide, giving a
    zero gap) cannot anchor their own window width and fall back to the
    corpus mean.
    """
    betas: dict[str, float | None] = {}
    for video_id, recs in records_by_video.items():
        ts = [r.timestamp for r in sort_records(recs)]
        try:
            beta = compute_beta(ts)
        except InsufficientDataError:
            betas[video_id] = None
            continue
        betas[video_id] = beta if beta > 0 else None
    return betas


def group_clips(
    segments: list[Segment],
    min_s: float = DEFAULT_MIN_CLIP_S,
    max_s: float = DEFAULT_MAX_CLIP_S,
) -> tuple[list[Clip], list[ClipDiagnostic]]:
    """Greedily group consecutive segments into clips of min_s..max_s seconds.

    The accumulator keeps absorbing segments until the clip both reaches
    min_s and can close at a clean break (the next segment does not overlap
    the clip span), never letting the span exceed max_s. Undersized runs are
    merged into their predecessor when the merged span fits, otherwise
    dropped; every dropped segment gets a diagnostic so the grouping stays a
    partition of the input.
    """
    clips: list[Clip] = []
    diagnostics: list[ClipDiagnostic] = []
    if not segments:
        return clips, diagnostics

    video_id = segments[0].video_id
    if any(s.video_id != video_id for s in segments):
        raise DomainError("group_clips expects segments from a single video")
    ordered = sorted(segments, key=lambda s: (s.start, s.end, s.narration_id))

    current: list[Segment] = []
    cur_end = 0.0

    def span() -> float:
        return cur_end - current[0].start

    def drop(members: list[Segment], code: str, why: str) -> None:
        diag = ClipDiagnostic(code, video_id, tuple(s.narration_id for s in members), why)
        diagnostics.append(diag)
        logger.warning("clip grouping dropped %d segment(s) of %s: %s", len(members), video_id, why)

    def close_current() -> None:
        nonlocal current
        clips.append(Clip(
            clip_id=f"{video_id}:{len(clips):04d}",
            video_id=video_id,
            start=current[0].start,
            end=cur_end,
            segments=tuple(current),
        ))
        current = []

    def close_undersized() -> None:
        """Merge an undersized run into the previous clip, or drop it."""
        nonlocal current
        if clips:
            prev = clips[-1]
            merged_span = cur_end - prev.start
            if merged_span <= max_s + _EPS:
                clips[-1] = replace(prev, end=max(prev.end, cur_end), segments=prev.segments + tuple(current))
                diagnostics.append(ClipDiagnostic(
                    "MERGED_TAIL", video_id,
                    tuple(s.narration_id for s in current),
                    f"undersized run ({span():.2f}s) merged into {prev.clip_id}",
                ))
                current = []
                return
        drop(current, "DROPPED_UNDERSIZED", f"run of {span():.2f}s cannot reach the {min_s:.0f}s minimum")
        current = []

    for seg in ordered:
        if seg.width > max_s + _EPS:
            drop([seg], "DROPPED_OVERSIZED", f"single segment of {seg.width:.2f}s exceeds the {max_s:.0f}s maximum")
            continue
        if not current:
            if clips and seg.start < clips[-1].end - _EPS:
                drop([seg], "DROPPED_OVERLAP", f"segment overlaps the closed clip {clips[-1].clip_id}")
                continue
            current = [seg]
            cur_end = seg.end
            continue

        candidate_end = max(cur_end, seg.end)
        candidate_span = candidate_end - current[0].start
        if span() < min_s - _EPS:
            if candidate_span <= max_s + _EPS:
                current.append(seg)
                cur_end = candidate_end
            else:
                close_undersized()
                cur_end = seg.end
                if clips and seg.start < clips[-1].end - _EPS:
                    drop([seg], "DROPPED_OVERLAP", f"segment overlaps the closed clip {clips[-1].clip_id}")
                else:
                    current = [seg]
        else:
            if seg.start >= cur_end - _EPS:
                close_current()
                current = [seg]
                cur_end = seg.end
            elif candidate_span <= max_s + _EPS:
                # Closing here would leave two overlapping clips; keep absorbing.
                current.append(seg)
                cur_end = candidate_end
            else:
                close_current()
                drop([seg], "DROPPED_OVERLAP", "segment overlaps a full clip that cannot absorb it")

    if current:
        if span() >= min_s - _EPS:
            close_current()
        else:
            close_undersized()

    return clips, diagnostics


def drop_silent_videos(manifests: list[VideoManifest]) -> list[VideoManifest]:
    """Keep only videos that carry an audio track, preserving order."""
    return [m for m in manifests if m.has_audio]
