"""Pipeline configuration and its digest.

One flat config drives every stage. The digest of the canonical JSON form
is stamped into checkpoints and export manifests: resuming a stage under a
different digest is refused, and two runs with equal digests over equal
inputs must produce byte-identical exports.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigurationError


@dataclass
class PipelineConfig:
    work_dir: str = "work"
    narrations_path: str = ""
    manifest_path: str = ""
    responses_path: str = ""           # candidate answers for the eval stage

    backend: str = "mock"              # mock | http
    endpoint_url: str = ""
    api_key_env: str = "EGOAVU_API_KEY"
    attachment_mode: str = "url"

    image_model: str = "captioner-image"
    video_model: str = "captioner-video"
    audio_model: str = "captioner-audio"
    graph_model: str = "graph-builder"
    fusion_model: str = "fusion-writer"
    qa_model: str = "qa-writer"
    judge_model: str = "grader"

    min_clip_s: float = 10.0
    max_clip_s: float = 360.0
    mattr_window: int = 200
    mattr_tau: float = 0.3
    drop_fraction: float = 0.25

    temperature: float = 0.0
    max_tokens: int = 1024
    seed: int = 0

    max_in_flight: int = 4
    max_attempts: int = 3
    min_request_interval_s: float = 0.0

    frame_fps: float = 1.0
    max_frames: int = 32

    split_ratio: float = 0.8
    avh_per_video: int = 1             # probes per category per video
    tr_per_video: int = 1              # pairs per pair-type per video

    def validate(self) -> "PipelineConfig":
        if self.backend not in ("mock", "http"):
            raise ConfigurationError(f"unknown backend {self.backend!r}")
        if self.backend == "http" and not self.endpoint_url:
            raise ConfigurationError("http backend needs endpoint_url")
        if not 0 < self.min_clip_s <= self.max_clip_s:
            raise ConfigurationError("clip bounds must satisfy 0 < min <= max")
        if self.mattr_window < 1:
            raise ConfigurationError("mattr_window must be >= 1")
        if not 0 <= self.mattr_tau < 1:
            raise ConfigurationError("mattr_tau must be in [0, 1)")
        if not 0 <= self.drop_fraction < 1:
            raise ConfigurationError("drop_fraction must be in [0, 1)")
        if not 0 < self.split_ratio < 1:
            raise ConfigurationError("split_ratio must be in (0, 1)")
        if self.temperature < 0:
            raise ConfigurationError("temperature must be >= 0")
        if self.max_in_flight < 1 or self.max_attempts < 1:
            raise ConfigurationError("concurrency bounds must be >= 1")
        return self

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def api_key(self) -> str | None:
        return os.environ.get(self.api_key_env) or None

    @property
    def work(self) -> Path:
        return Path(self.work_dir)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw).validate()

    def to_file(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
