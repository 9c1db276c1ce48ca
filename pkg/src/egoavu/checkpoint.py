"""Stage checkpoints for resumable runs.

The checkpoint file records only stage metadata (config digest, completion
flag); per-item progress is recovered from the stage's own output record
file, whose append-with-fsync discipline makes the set of completed item
ids exactly the set of fully written lines.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CheckpointMismatchError


@dataclass
class StageCheckpoint:
    stage: str
    config_digest: str
    path: Path
    completed: bool = False
    item_count: int = 0
    started_at: str = ""
    finished_at: str = ""
    completed_ids: set[str] = field(default_factory=set)

    @classmethod
    def open(cls, directory: str | Path, stage: str, config_digest: str) -> "StageCheckpoint":
        """Load-or-create; refuses to resume under a different config digest."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{stage}.json"
        if path.exists():
            with open(path, "r", encoding="utf-8") as fh:
                meta = json.load(fh)
            if meta["config_digest"] != config_digest:
                raise CheckpointMismatchError(
                    f"stage {stage!r} was started with config digest {meta['config_digest']}, "
                    f"refusing to resume with {config_digest}"
                )
            return cls(
                stage=stage,
                config_digest=config_digest,
                path=path,
                completed=meta.get("completed", False),
                item_count=meta.get("item_count", 0),
                started_at=meta.get("started_at", ""),
                finished_at=meta.get("finished_at", ""),
            )
        checkpoint = cls(stage=stage, config_digest=config_digest, path=path,
                         started_at=_now())
        checkpoint.save()
        return checkpoint

    def mark_items(self, ids: set[str]) -> None:
        self.completed_ids |= ids
        self.item_count = len(self.completed_ids)

    def finish(self) -> None:
        self.completed = True
        self.finished_at = _now()
        self.save()

    def save(self) -> None:
        payload = {
            "stage": self.stage,
            "config_digest": self.config_digest,
            "completed": self.completed,
            "item_count": self.item_count,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        tmp.replace(self.path)


def stage_complete(directory: str | Path, stage: str) -> bool:
    path = Path(directory) / f"{stage}.json"
    if not path.exists():
        return False
    with open(path, "r", encoding="utf-8") as fh:
        return bool(json.load(fh).get("completed", False))


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
