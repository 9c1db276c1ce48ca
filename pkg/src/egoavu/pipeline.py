"""Stage orchestration: checkpointed, resumable, deterministic.

Stages run in a fixed order (ingest, enrich, filter, mcg, fuse, qagen,
export, eval), each consuming the record files of its upstream stages and
appending its own. Work units are processed in sorted order and written
one fsynced line at a time, so a killed run resumes into byte-identical
output. Model-bound stages fan out through a worker pool but consume
results in submission order to keep files reproducible.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence, TypeVar

from . import records as rec
from .checkpoint import StageCheckpoint, stage_complete
from .config import PipelineConfig
from .diversity import apply_selection, score_video, select_videos
from .enrichment import EnhancedNarrations, Enricher
from .errors import (
    DataError,
    EgoavuError,
    InsufficientDataError,
    StageOrderError,
    StructuredOutputError,
)
from .evaluation import aggregate_report, render_table, score_records
from .fusion import DenseNarration, FusedNarration, fuse_clip, fuse_dense
from .gateway import DecodeParams, GatewayClient, HttpBackend, MockBackend, RetryPolicy
from .ingest import (
    Clip,
    Segment,
    VideoManifest,
    compute_alpha,
    drop_silent_videos,
    group_clips,
    derive_segments,
    parse_manifest_file,
    parse_narration_file,
    video_betas,
)
from .mcg import (
    Diagnostic,
    MultiModalContextGraph,
    build_mcg_prompt,
    error_diagnostics,
    parse_mcg,
    validate_mcg,
)
from .mockmodels import respond as scripted_respond
from .qa import (
    AVH_CATEGORIES,
    QAItem,
    balance_export,
    gen_avdn,
    gen_avh,
    gen_avsn,
    gen_ssa,
    gen_tr_ordering,
    gen_tr_pair,
    validate_item_shape,
)
from .prompts import TR_PAIR_TYPES

logger = logging.getLogger(__name__)

STAGES = ("ingest", "enrich", "filter", "mcg", "fuse", "qagen", "export", "eval")

FORMAT_VIDEOS = "egoavu-videos/1"
FORMAT_PROGRESS = "egoavu-progress/1"
FORMAT_EVAL = "egoavu-eval/1"

T = TypeVar("T")
U = TypeVar("U")


class CrashInjected(EgoavuError):
    """Raised by the test-only crash hook to simulate a mid-stage kill."""


def build_client(config: PipelineConfig) -> GatewayClient:
    if config.backend == "mock":
        backend: Any = MockBackend(default=scripted_respond)
    else:
        backend = HttpBackend(
            config.endpoint_url,
            api_key=config.api_key(),
            attachment_mode=config.attachment_mode,
        )
    return GatewayClient(
        backend,
        retry=RetryPolicy(max_attempts=config.max_attempts),
        max_in_flight=config.max_in_flight,
        min_request_interval_s=config.min_request_interval_s,
    )


def decode_params(config: PipelineConfig) -> DecodeParams:
    return DecodeParams(temperature=config.temperature, max_tokens=config.max_tokens, seed=config.seed)


def _paths(config: PipelineConfig) -> dict[str, Path]:
    work = config.work
    return {
        "checkpoints": work / "checkpoints",
        "videos": work / "videos.records",
        "clips": work / "clips.records",
        "enriched": work / "enriched.records",
        "diversity": work / "diversity.records",
        "mcg": work / "mcg.records",
        "fused": work / "fused.records",
        "dense": work / "dense.records",
        "qa": work / "qa.records",
        "qa_progress": work / "qa.progress",
        "instruct": work / "instruct.jsonl",
        "bench": work / "bench.jsonl",
        "manifest": work / "manifest.json",
        "eval_records": work / "eval_records.jsonl",
        "report_json": work / "report.json",
        "report_txt": work / "report.txt",
        "log": work / "pipeline.log",
    }


class _Crasher:
    """Counts processed units and raises once the injected budget is hit."""

    def __init__(self, after: int | None):
        self.after = after
        self.done = 0

    def tick(self) -> None:
        self.done += 1
        if self.after is not None and self.done >= self.after:
            raise CrashInjected(f"injected crash after {self.done} units")


def _ordered_parallel(fn: Callable[[T], U], units: Sequence[T], workers: int) -> Iterator[U]:
    """Yield fn(unit) in input order, computing up to ``workers`` ahead."""
    if workers <= 1 or len(units) <= 1:
        for unit in units:
            yield fn(unit)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, units)


def run_stage(stage: str, config: PipelineConfig, *, _crash_after: int | None = None) -> StageCheckpoint:
    """Run (or resume) one stage; upstream stages must be complete."""
    if stage not in STAGES:
        raise StageOrderError(f"unknown stage {stage!r}; expected one of {', '.join(STAGES)}")
    config.validate()
    paths = _paths(config)
    paths["checkpoints"].mkdir(parents=True, exist_ok=True)

    for upstream in STAGES[: STAGES.index(stage)]:
        if upstream == "eval":
            continue
        if not stage_complete(paths["checkpoints"], upstream):
            raise StageOrderError(f"stage {stage!r} needs {upstream!r} to complete first")

    checkpoint = StageCheckpoint.open(paths["checkpoints"], stage, config.digest())
    if checkpoint.completed:
        logger.info("stage %s already complete; nothing to do", stage)
        return checkpoint

    handler = logging.FileHandler(paths["log"], encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    package_logger = logging.getLogger("egoavu")
    previous_level = package_logger.level
    package_logger.addHandler(handler)
    if package_logger.level > logging.INFO or package_logger.level == logging.NOTSET:
        package_logger.setLevel(logging.INFO)
    try:
        crasher = _Crasher(_crash_after)
        runner = globals()[f"_stage_{stage}"]
        runner(config, paths, checkpoint, crasher)
        checkpoint.finish()
    finally:
        package_logger.removeHandler(handler)
        package_logger.setLevel(previous_level)
        handler.close()
    logger.info("stage %s complete (%d items)", stage, checkpoint.item_count)
    return checkpoint


def run_pipeline(config: PipelineConfig, through: str = "export") -> None:
    """Run every stage up to and including ``through``."""
    for stage in STAGES[: STAGES.index(through) + 1]:
        run_stage(stage, config)


# ---------------------------------------------------------------------------
# Stage implementations
# ---------------------------------------------------------------------------


def _stage_ingest(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
                  crasher: _Crasher) -> None:
    if not config.narrations_path or not config.manifest_path:
        raise DataError("ingest needs narrations_path and manifest_path in the config")
    with open(config.narrations_path, "rb") as fh:
        narrations = parse_narration_file(fh, rec.FORMAT_INGEST)
    with open(config.manifest_path, "rb") as fh:
        manifests = parse_manifest_file(fh)

    with_audio = drop_silent_videos(manifests)
    dropped = {m.video_id for m in manifests} - {m.video_id for m in with_audio}
    if dropped:
        logger.info("dropped %d video(s) without an audio track: %s", len(dropped), sorted(dropped))
    by_video: dict[str, list] = {}
    manifest_ids = {m.video_id for m in with_audio}
    for record in narrations:
        if record.video_id not in manifest_ids:
            continue
        by_video.setdefault(record.video_id, []).append(record)

    betas = video_betas(by_video)
    usable = [b for b in betas.values() if b is not None]
    if not usable:
        raise InsufficientDataError("no video has enough narrations to derive timestamp gaps")
    alpha = compute_alpha(usable)

    manifest_by_id = {m.video_id: m for m in with_audio}
    video_rows = []
    clip_rows = []
    for video_id in sorted(by_video):
        beta = betas[video_id] if betas[video_id] is not None else alpha
        manifest = manifest_by_id[video_id]
        segments = derive_segments(by_video[video_id], alpha, beta, duration=manifest.duration)
        clips, diagnostics = group_clips(segments, config.min_clip_s, config.max_clip_s)
        video_rows.append({
            "video_id": video_id,
            "media_locator": manifest.media_locator,
            "duration": manifest.duration,
            "beta": beta,
            "alpha": alpha,
            "clip_count": len(clips),
            "dropped_segments": sum(len(d.narration_ids) for d in diagnostics if d.is_drop),
        })
        for clip in clips:
            clip_rows.append(_clip_row(clip))
    rec.write_records(paths["videos"], FORMAT_VIDEOS, video_rows)
    rec.write_records(paths["clips"], rec.FORMAT_CLIPS, clip_rows)
    checkpoint.mark_items({row["video_id"] for row in video_rows})
    logger.info("ingested %d videos into %d clips", len(video_rows), len(clip_rows))


def _clip_row(clip: Clip) -> dict[str, Any]:
    return {
        "clip_id": clip.clip_id,
        "video_id": clip.video_id,
        "start": clip.start,
        "end": clip.end,
        "segments": [
            {
                "narration_id": s.narration_id,
                "text": s.text,
                "timestamp": s.timestamp,
                "start": s.start,
                "end": s.end,
                "beta": s.beta,
                "alpha": s.alpha,
            }
            for s in clip.segments
        ],
    }


def _clip_from_row(row: dict[str, Any]) -> Clip:
    return Clip(
        clip_id=row["clip_id"],
        video_id=row["video_id"],
        start=row["start"],
        end=row["end"],
        segments=tuple(
            Segment(
                narration_id=s["narration_id"],
                video_id=row["video_id"],
                text=s["text"],
                timestamp=s["timestamp"],
                start=s["start"],
                end=s["end"],
                beta=s["beta"],
                alpha=s["alpha"],
            )
            for s in row["segments"]
        ),
    )


def _load_videos(paths: dict[str, Path]) -> dict[str, dict[str, Any]]:
    return {row["video_id"]: row for row in rec.read_records(paths["videos"], FORMAT_VIDEOS)}


def _load_clips(paths: dict[str, Path]) -> list[dict[str, Any]]:
    return rec.read_records(paths["clips"], rec.FORMAT_CLIPS)


def _stage_enrich(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
                  crasher: _Crasher) -> None:
    videos = _load_videos(paths)
    clips = sorted(_load_clips(paths), key=lambda r: r["clip_id"])
    client = build_client(config)
    enricher = Enricher(
        client,
        image_model=config.image_model,
        video_model=config.video_model,
        audio_model=config.audio_model,
        decode=decode_params(config),
        frame_fps=config.frame_fps,
        max_frames=config.max_frames,
    )

    with rec.RecordAppender(paths["enriched"], rec.FORMAT_ENRICHED) as out:
        done = {row["clip_id"] for row in out.existing}
        checkpoint.mark_items(done)
        pending = [row for row in clips if row["clip_id"] not in done]

        def work(row: dict[str, Any]) -> dict[str, Any]:
            clip = _clip_from_row(row)
            video = videos[clip.video_id]
            manifest = VideoManifest(clip.video_id, video["media_locator"], True, video["duration"])
            enhanced = enricher.enhance_clip(clip, manifest)
            return {
                "clip_id": clip.clip_id,
                "video_id": clip.video_id,
                "start": clip.start,
                "end": clip.end,
                "image_caption": enhanced.image_caption,
                "video_caption": enhanced.video_caption,
                "audio_caption": enhanced.audio_caption,
                "action_narration": enhanced.action_narration,
                "center_frame": enhanced.center_frame_ref.canonical() if enhanced.center_frame_ref else None,
            }

        for result in _ordered_parallel(work, pending, config.max_in_flight):
            out.append(result)
            checkpoint.mark_items({result["clip_id"]})
            crasher.tick()


def _enhanced_from_row(row: dict[str, Any]) -> EnhancedNarrations:
    return EnhancedNarrations(
        clip_id=row["clip_id"],
        image_caption=row["image_caption"],
        video_caption=row["video_caption"],
        audio_caption=row["audio_caption"],
        action_narration=row["action_narration"],
    )


def _stage_filter(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
                  crasher: _Crasher) -> None:
    enriched = rec.read_records(paths["enriched"], rec.FORMAT_ENRICHED)
    by_video: dict[str, list[dict[str, Any]]] = {}
    for row in enriched:
        by_video.setdefault(row["video_id"], []).append(row)

    scores = []
    for video_id in sorted(by_video):
        rows = sorted(by_video[video_id], key=lambda r: (r["start"], r["clip_id"]))
        combined = "\n".join(
            "\n".join((r["image_caption"], r["video_caption"], r["audio_caption"], r["action_narration"]))
            for r in rows
        )
        scores.append(score_video(video_id, combined, config.mattr_window))
    retained = select_videos(scores, config.mattr_tau, config.drop_fraction)
    marked = apply_selection(scores, retained)
    rec.write_records(
        paths["diversity"],
        rec.FORMAT_DIVERSITY,
        (
            {"video_id": s.video_id, "token_count": s.token_count, "mattr": s.mattr, "retained": s.retained}
            for s in sorted(marked, key=lambda s: s.video_id)
        ),
    )
    checkpoint.mark_items({s.video_id for s in marked})
    logger.info("diversity filter retained %d of %d videos", len(retained), len(scores))


def _retained_videos(paths: dict[str, Path]) -> set[str]:
    return {
        row["video_id"]
        for row in rec.read_records(paths["diversity"], rec.FORMAT_DIVERSITY)
        if row["retained"]
    }


def _stage_mcg(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
               crasher: _Crasher) -> None:
    retained = _retained_videos(paths)
    enriched = [
        row for row in rec.read_records(paths["enriched"], rec.FORMAT_ENRICHED)
        if row["video_id"] in retained
    ]
    enriched.sort(key=lambda r: r["clip_id"])
    client = build_client(config)
    decode = decode_params(config)

    with rec.RecordAppender(paths["mcg"], rec.FORMAT_MCG) as out:
        done = {row["clip_id"] for row in out.existing}
        checkpoint.mark_items(done)
        pending = [row for row in enriched if row["clip_id"] not in done]

        def work(row: dict[str, Any]) -> dict[str, Any]:
            enhanced = _enhanced_from_row(row)
            graph, diags, flagged = _graph_with_retry(client, config.graph_model, enhanced, decode)
            return {
                "clip_id": row["clip_id"],
                "video_id": row["video_id"],
                "graph": graph.to_dict() if graph else None,
                "diagnostics": [
                    {"code": d.code, "level": d.level, "path": d.path, "message": d.message}
                    for d in diags
                ],
                "flagged": flagged,
            }

        for result in _ordered_parallel(work, pending, config.max_in_flight):
            out.append(result)
            checkpoint.mark_items({result["clip_id"]})
            crasher.tick()


def _graph_with_retry(
    client: GatewayClient,
    model_id: str,
    enhanced: EnhancedNarrations,
    decode: DecodeParams,
) -> tuple[MultiModalContextGraph | None, list[Diagnostic], bool]:
    """Build, parse and validate a graph, with one re-prompt on failure."""
    request = build_mcg_prompt(enhanced, model_id, decode)
    last_diags: list[Diagnostic] = []
    for round_no in (0, 1):
        try:
            value = client.complete_structured(request, "mcg/v1", max_repair=1)
            graph = parse_mcg(value, clip_id=enhanced.clip_id)
        except StructuredOutputError as exc:
            problems = exc.diagnostics or [str(exc)]
            last_diags = [Diagnostic("PARSE", "error", "$", str(p)) for p in problems]
            if round_no == 0:
                request = request.with_followup(
                    "The graph was invalid. Correct it and reply with only the JSON: "
                    + "; ".join(str(p) for p in problems)
                )
            continue
        diags = validate_mcg(graph, enhanced)
        errors = error_diagnostics(diags)
        if not errors:
            return graph, diags, False
        last_diags = diags
        if round_no == 0:
            request = request.with_followup(
                "The graph failed validation. Fix these findings and reply with only the JSON: "
                + "; ".join(f"{d.path}: {d.message}" for d in errors)
            )
    logger.warning("clip %s flagged: context graph failed validation twice", enhanced.clip_id)
    return None, last_diags, True


def _stage_fuse(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
                crasher: _Crasher) -> None:
    retained = _retained_videos(paths)
    enriched = {
        row["clip_id"]: row
        for row in rec.read_records(paths["enriched"], rec.FORMAT_ENRICHED)
        if row["video_id"] in retained
    }
    graphs = {
        row["clip_id"]: row
        for row in rec.read_records(paths["mcg"], rec.FORMAT_MCG)
        if not row["flagged"]
    }
    client = build_client(config)
    decode = decode_params(config)

    clip_ids = sorted(cid for cid in enriched if cid in graphs)
    with rec.RecordAppender(paths["fused"], rec.FORMAT_FUSED) as fused_out:
        done = {row["clip_id"] for row in fused_out.existing}
        checkpoint.mark_items({f"clip:{cid}" for cid in done})
        pending = [cid for cid in clip_ids if cid not in done]

        def work(cid: str) -> dict[str, Any]:
            row = enriched[cid]
            enhanced = _enhanced_from_row(row)
            graph = parse_mcg(graphs[cid]["graph"], clip_id=cid)
            fused = fuse_clip(client, config.fusion_model, enhanced, graph, decode=decode)
            return {
                "clip_id": cid,
                "video_id": row["video_id"],
                "start": row["start"],
                "end": row["end"],
                "caption": fused.caption,
                "source_graph": fused.source_graph,
            }

        for result in _ordered_parallel(work, pending, config.max_in_flight):
            fused_out.append(result)
            checkpoint.mark_items({f"clip:{result['clip_id']}"})
            crasher.tick()

    fused_rows = rec.read_records(paths["fused"], rec.FORMAT_FUSED)
    by_video: dict[str, list[dict[str, Any]]] = {}
    for row in fused_rows:
        by_video.setdefault(row["video_id"], []).append(row)

    with rec.RecordAppender(paths["dense"], rec.FORMAT_DENSE) as dense_out:
        done_videos = {row["video_id"] for row in dense_out.existing}
        checkpoint.mark_items({f"video:{vid}" for vid in done_videos})
        pending_videos = [vid for vid in sorted(by_video) if vid not in done_videos]

        def dense_work(video_id: str) -> dict[str, Any]:
            pairs = [
                (FusedNarration(row["clip_id"], row["caption"], row["source_graph"]),
                 (row["start"], row["end"]))
                for row in sorted(by_video[video_id], key=lambda r: r["start"])
            ]
            dense = fuse_dense(client, config.fusion_model, video_id, pairs, decode=decode)
            return {
                "video_id": video_id,
                "caption": dense.caption,
                "covered_span": [dense.covered_span[0], dense.covered_span[1]],
            }

        for result in _ordered_parallel(dense_work, pending_videos, config.max_in_flight):
            dense_out.append(result)
            checkpoint.mark_items({f"video:{result['video_id']}"})
            crasher.tick()


def _stage_qagen(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
                 crasher: _Crasher) -> None:
    videos = _load_videos(paths)
    fused_rows = rec.read_records(paths["fused"], rec.FORMAT_FUSED)
    dense_rows = {row["video_id"]: row for row in rec.read_records(paths["dense"], rec.FORMAT_DENSE)}
    graphs = {
        row["clip_id"]: row for row in rec.read_records(paths["mcg"], rec.FORMAT_MCG)
        if not row["flagged"]
    }
    by_video: dict[str, list[dict[str, Any]]] = {}
    for row in fused_rows:
        by_video.setdefault(row["video_id"], []).append(row)

    client = build_client(config)
    decode = decode_params(config)

    progress = rec.RecordAppender(paths["qa_progress"], FORMAT_PROGRESS)
    done_videos = {row["unit"] for row in progress.existing}
    checkpoint.mark_items(done_videos)

    # Drop items from videos that never reached the progress mark: they will
    # be regenerated identically, and dedup keeps the file canonical.
    existing_rows = rec.recover_append_file(paths["qa"], rec.FORMAT_QA)
    kept = [row for row in existing_rows if row["video_id"] in done_videos]
    if len(kept) != len(existing_rows):
        rec.write_records(paths["qa"], rec.FORMAT_QA, kept)

    qa_out = rec.RecordAppender(paths["qa"], rec.FORMAT_QA)
    try:
        pending = [vid for vid in sorted(by_video) if vid not in done_videos]

        def work(video_id: str) -> list[QAItem]:
            return _generate_video_items(
                config, client, decode, video_id,
                videos[video_id], by_video[video_id], dense_rows.get(video_id), graphs,
            )

        for video_id, items in zip(pending, _ordered_parallel(work, pending, config.max_in_flight)):
            for item in items:
                problems = validate_item_shape(item)
                if problems:
                    raise EgoavuError(f"generated item {item.qa_id} failed shape checks: {problems}")
                qa_out.append(item.to_dict())
            progress.append({"unit": video_id})
            checkpoint.mark_items({video_id})
            crasher.tick()
    finally:
        qa_out.close()
        progress.close()


def _generate_video_items(
    config: PipelineConfig,
    client: GatewayClient,
    decode: DecodeParams,
    video_id: str,
    video_row: dict[str, Any],
    clip_rows: list[dict[str, Any]],
    dense_row: dict[str, Any] | None,
    graphs: dict[str, dict[str, Any]],
) -> list[QAItem]:
    items: list[QAItem] = []
    seen_ids: set[str] = set()

    def keep(item: QAItem) -> None:
        # qa_id digests (video, task, subtype, question): an identical
        # question asked twice of one video is a duplicate, keep the first.
        if item.qa_id not in seen_ids:
            seen_ids.add(item.qa_id)
            items.append(item)
        else:
            logger.info("dropping duplicate question %s for video %s", item.qa_id, video_id)

    duration = video_row["duration"]
    whole = (0.0, duration)
    ordered_clips = sorted(clip_rows, key=lambda r: (r["start"], r["clip_id"]))

    for row in ordered_clips:
        cid = row["clip_id"]
        span = (row["start"], row["end"])
        fused = FusedNarration(cid, row["caption"], row["source_graph"])
        if cid in graphs:
            graph = parse_mcg(graphs[cid]["graph"], clip_id=cid)
            ssa = gen_ssa(client, config.qa_model, graph, fused, span, video_id, decode=decode)
            if ssa is not None:
                keep(ssa)
        keep(gen_avsn(fused, span, video_id, video_duration=duration))

    dense_caption = dense_row["caption"] if dense_row else ""
    if dense_row:
        dense = DenseNarration(video_id, dense_caption,
                               (dense_row["covered_span"][0], dense_row["covered_span"][1]))
        keep(gen_avdn(dense))

    if dense_caption:
        for category in AVH_CATEGORIES:
            for _ in range(config.avh_per_video):
                factual, hallucinated = gen_avh(
                    client, config.qa_model, dense_caption, category, video_id, whole,
                    source_id=video_id, decode=decode,
                )
                keep(factual)
                keep(hallucinated)

    captions = [row["caption"] for row in ordered_clips]
    clip_ids = [row["clip_id"] for row in ordered_clips]
    if len(captions) >= 2:
        for pair_type in TR_PAIR_TYPES:
            for _ in range(config.tr_per_video):
                before, after = gen_tr_pair(
                    client, config.qa_model, captions, pair_type, video_id, whole,
                    seed=config.seed, source_ids=clip_ids, decode=decode,
                )
                keep(before)
                keep(after)
    ordering = gen_tr_ordering(
        client, config.qa_model, captions, video_id, whole,
        seed=config.seed, source_ids=clip_ids, decode=decode,
    )
    if ordering is not None:
        keep(ordering)
    return items


def _stage_export(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
                  crasher: _Crasher) -> None:
    rows = rec.read_records(paths["qa"], rec.FORMAT_QA)
    items = [QAItem.from_dict(row) for row in rows]
    manifest = export_jsonl(items, config, paths)
    checkpoint.mark_items({"export"})
    logger.info(
        "exported %d instruct / %d bench items",
        manifest["splits"]["instruct"]["total"], manifest["splits"]["bench"]["total"],
    )


def export_jsonl(items: list[QAItem], config: PipelineConfig,
                 paths: dict[str, Path] | None = None) -> dict[str, Any]:
    """Write instruct/bench splits plus the summary manifest; returns it."""
    paths = paths or _paths(config)
    ids = [item.qa_id for item in items]
    if len(ids) != len(set(ids)):
        duplicated = sorted({i for i in ids if ids.count(i) > 1})
        raise DataError(f"duplicate qa_ids reached export: {duplicated[:5]}")
    instruct, bench = balance_export(items, config.split_ratio, config.seed)
    rec.write_jsonl(paths["instruct"], (i.to_dict() for i in instruct))
    rec.write_jsonl(paths["bench"], (i.to_dict() for i in bench))

    videos = _load_videos(paths) if paths["videos"].exists() else {}

    def split_summary(split_items: list[QAItem]) -> dict[str, Any]:
        per_task: dict[str, int] = {}
        for item in split_items:
            per_task[item.task] = per_task.get(item.task, 0) + 1
        return {"total": len(split_items), "per_task": dict(sorted(per_task.items()))}

    histogram: dict[str, int] = {}
    exported_videos = sorted({i.video_id for i in items})
    for video_id in exported_videos:
        if video_id not in videos:
            continue
        duration = videos[video_id]["duration"]
        bucket = min(int(duration // 60), 5)
        label = f"{bucket * 60}-{(bucket + 1) * 60}s"
        histogram[label] = histogram.get(label, 0) + 1

    manifest = {
        "format": "egoavu-export/1",
        "config_digest": config.digest(),
        "seed": config.seed,
        "split_ratio": config.split_ratio,
        "splits": {"instruct": split_summary(instruct), "bench": split_summary(bench)},
        "duration_histogram": dict(sorted(histogram.items())),
        "videos": {
            "total": len(exported_videos),
            "instruct": len({i.video_id for i in instruct}),
            "bench": len({i.video_id for i in bench}),
        },
    }
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _stage_eval(config: PipelineConfig, paths: dict[str, Path], checkpoint: StageCheckpoint,
                crasher: _Crasher) -> None:
    if not config.responses_path:
        raise DataError("eval needs responses_path (newline-delimited {qa_id, response})")
    items = [QAItem.from_dict(row) for row in rec.read_jsonl(paths["bench"])]
    responses = {row["qa_id"]: row["response"] for row in rec.read_jsonl(config.responses_path)}
    client = build_client(config)
    records = score_records(
        items, responses,
        judge_client=client, judge_model=config.judge_model, decode=decode_params(config),
    )
    rec.write_jsonl(paths["eval_records"], (r.to_dict() for r in records))
    report = aggregate_report(records, items)
    with open(paths["report_json"], "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    table = render_table(report)
    paths["report_txt"].write_text(table + "\n", encoding="utf-8")
    checkpoint.mark_items({r.qa_id for r in records})
    logger.info("scored %d responses\n%s", len(records), table)
