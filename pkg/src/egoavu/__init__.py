"""Data engine and evaluation harness for egocentric audio-visual QA."""

from .config import PipelineConfig
from .diversity import DiversityScore, mattr, select_videos, tokenize
from .enrichment import EnhancedNarrations, Enricher, select_center_frame
from .evaluation import EvalRecord, Report, aggregate_report, judge_open, score_records
from .extraction import extract_binary, extract_choice
from .fusion import DenseNarration, FusedNarration, fuse_clip, fuse_dense
from .gateway import (
    Attachment,
    ChatRequest,
    ChatResponse,
    DecodeParams,
    GatewayClient,
    HttpBackend,
    Message,
    MockBackend,
)
from .ingest import (
    Clip,
    NarrationRecord,
    Segment,
    VideoManifest,
    compute_alpha,
    compute_beta,
    drop_silent_videos,
    group_clips,
    parse_narration_file,
    segment_bounds,
)
from .mcg import MultiModalContextGraph, SoundEvent, build_mcg_prompt, parse_mcg, validate_mcg
from .metrics import meteor, rouge_l
from .pipeline import run_pipeline, run_stage
from .qa import QAItem, balance_export
from .review import BenchStore, create_app, serve_review_api

__version__ = "0.1.0"

__all__ = [
    "Attachment",
    "BenchStore",
    "ChatRequest",
    "ChatResponse",
    "Clip",
    "DecodeParams",
    "DenseNarration",
    "DiversityScore",
    "EnhancedNarrations",
    "Enricher",
    "EvalRecord",
    "FusedNarration",
    "GatewayClient",
    "HttpBackend",
    "Message",
    "MockBackend",
    "MultiModalContextGraph",
    "NarrationRecord",
    "PipelineConfig",
    "QAItem",
    "Report",
    "Segment",
    "SoundEvent",
    "VideoManifest",
    "aggregate_report",
    "balance_export",
    "build_mcg_prompt",
    "compute_alpha",
    "compute_beta",
    "create_app",
    "drop_silent_videos",
    "extract_binary",
    "extract_choice",
    "fuse_clip",
    "fuse_dense",
    "group_clips",
    "judge_open",
    "mattr",
    "meteor",
    "parse_mcg",
    "parse_narration_file",
    "rouge_l",
    "run_pipeline",
    "run_stage",
    "score_records",
    "segment_bounds",
    "select_center_frame",
    "select_videos",
    "serve_review_api",
    "tokenize",
    "validate_mcg",
]
