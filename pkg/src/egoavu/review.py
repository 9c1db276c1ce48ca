"""Human verification service over the benchmark split.

Reviewers pull unreviewed items, watch the referenced clip span, and file
accept/modify/reject verdicts. Every verdict lands in an append-only audit
log; the effective status of an item is its latest verdict, so concurrent
reviewers resolve last-write-wins without losing history. The verified
export keeps accepted and modified items only, with edits substituted.
"""

from __future__ import annotations

import logging
import threading
import time
from pathlib import Path
from typing import Any, Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .records import dumps_record, read_jsonl, recover_append_file, write_jsonl

logger = logging.getLogger(__name__)

VERDICTS = ("accept", "modify", "reject")
_STATUS = {"accept": "accepted", "modify": "modified", "reject": "rejected"}

VERDICTS_LOG_FORMAT = "egoavu-verdicts/1"


class VerdictBody(BaseModel):
    qa_id: str
    verdict: Literal["accept", "modify", "reject"]
    edited_question: str | None = None
    edited_answer: str | None = None
    reviewer: str = Field(default="default", min_length=1)


class BenchStore:
    """Benchmark items plus the verdict audit log.

    The log is the source of truth: stats and statuses are always
    recomputable by replaying it from the top.
    """

    def __init__(self, bench_path: str | Path, *, videos: dict[str, dict[str, Any]] | None = None,
                 log_path: str | Path | None = None):
        self.bench_path = Path(bench_path)
        self.items: dict[str, dict[str, Any]] = {}
        for row in read_jsonl(self.bench_path):
            self.items[row["qa_id"]] = row
        self.videos = videos or {}
        self.log_path = Path(log_path) if log_path else self.bench_path.with_name("verdicts.jsonl")
        self._lock = threading.Lock()
        self._audit: list[dict[str, Any]] = []
        self._latest: dict[str, dict[str, Any]] = {}
        if self.log_path.exists():
            for entry in recover_append_file(self.log_path, VERDICTS_LOG_FORMAT):
                self._audit.append(entry)
                self._latest[entry["qa_id"]] = entry
        self._log_fh = None

    def _ensure_log(self) -> None:
        if self._log_fh is None:
            if not self.log_path.exists():
                self.log_path.parent.mkdir(parents=True, exist_ok=True)
                self.log_path.write_text(f"format: {VERDICTS_LOG_FORMAT}\n", encoding="utf-8")
            self._log_fh = open(self.log_path, "a", encoding="utf-8")

    def status_of(self, qa_id: str) -> str:
        entry = self._latest.get(qa_id)
        return _STATUS[entry["verdict"]] if entry else "unreviewed"

    def submit(self, body: VerdictBody) -> dict[str, Any]:
        if body.qa_id not in self.items:
            raise KeyError(body.qa_id)
        if body.verdict == "modify" and not (body.edited_question or body.edited_answer):
            raise ValueError("a modify verdict must carry edited_question and/or edited_answer")
        with self._lock:
            self._ensure_log()
            entry = {
                "seq": len(self._audit) + 1,
                "qa_id": body.qa_id,
                "verdict": body.verdict,
                "edited_question": body.edited_question,
                "edited_answer": body.edited_answer,
                "reviewer": body.reviewer,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            }
            self._log_fh.write(dumps_record(entry) + "\n")
            self._log_fh.flush()
            self._audit.append(entry)
            self._latest[body.qa_id] = entry
        return entry

    def queue(self, task: str | None, status: str | None, page: int, page_size: int) -> dict[str, Any]:
        status = status or "unreviewed"
        matched = []
        for qa_id in sorted(self.items):
            item = self.items[qa_id]
            if task and item["task"] != task:
                continue
            item_status = self.status_of(qa_id)
            if status != "any" and item_status != status:
                continue
            matched.append({**item, "status": item_status})
        start = (page - 1) * page_size
        return {
            "items": matched[start:start + page_size],
            "page": page,
            "page_size": page_size,
            "total": len(matched),
        }

    def item_detail(self, qa_id: str) -> dict[str, Any]:
        if qa_id not in self.items:
            raise KeyError(qa_id)
        item = dict(self.items[qa_id])
        video = self.videos.get(item["video_id"], {})
        entry = self._latest.get(qa_id)
        return {
            **item,
            "status": self.status_of(qa_id),
            "media_locator": video.get("media_locator"),
            "video_duration": video.get("duration"),
            "latest_verdict": entry,
        }

    def stats(self) -> dict[str, Any]:
        per_task: dict[str, dict[str, int]] = {}
        counters = {"accepted": 0, "modified": 0, "rejected": 0, "unreviewed": 0}
        for qa_id, item in self.items.items():
            status = self.status_of(qa_id)
            task_bucket = per_task.setdefault(
                item["task"], {"accepted": 0, "modified": 0, "rejected": 0, "unreviewed": 0}
            )
            task_bucket[status] += 1
            counters[status] += 1
        reviewed = counters["accepted"] + counters["modified"] + counters["rejected"]
        return {
            "per_task": dict(sorted(per_task.items())),
            "total": len(self.items),
            "reviewed": reviewed,
            "accepted": counters["accepted"],
            "modified": counters["modified"],
            "rejected": counters["rejected"],
            "unreviewed": counters["unreviewed"],
            "modified_ratio": counters["modified"] / reviewed if reviewed else 0.0,
        }

    def export_verified(self, out_path: str | Path) -> dict[str, Any]:
        """Verified bench: accepted and modified items, edits substituted."""
        rows = []
        excluded = 0
        for qa_id in sorted(self.items):
            status = self.status_of(qa_id)
            if status not in ("accepted", "modified"):
                excluded += 1
                continue
            row = dict(self.items[qa_id])
            row["verification"] = status
            if status == "modified":
                entry = self._latest[qa_id]
                if entry.get("edited_question"):
                    row["question"] = entry["edited_question"]
                if entry.get("edited_answer"):
                    row["answer"] = entry["edited_answer"]
            rows.append(row)
        write_jsonl(out_path, rows)
        return {"path": str(out_path), "exported": len(rows), "excluded": excluded}

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None


def create_app(store: BenchStore, *, ui_dir: str | Path | None = None,
               verified_out: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="egoavu review", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )
    default_verified = Path(verified_out) if verified_out else store.bench_path.with_name("verified_bench.jsonl")

    @app.get("/queue")
    def queue(task: str | None = None, status: str | None = None,
              page: int = 1, page_size: int = 20) -> dict[str, Any]:
        if page < 1 or page_size < 1:
            raise HTTPException(status_code=422, detail="page and page_size must be >= 1")
        return store.queue(task, status, page, page_size)

    @app.get("/item/{qa_id}")
    def item(qa_id: str) -> dict[str, Any]:
        try:
            return store.item_detail(qa_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown qa_id {qa_id!r}")

    @app.post("/verdict")
    def verdict(body: VerdictBody) -> dict[str, Any]:
        try:
            entry = store.submit(body)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown qa_id {body.qa_id!r}")
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"ok": True, "qa_id": body.qa_id, "status": _STATUS[body.verdict], "seq": entry["seq"]}

    @app.get("/stats")
    def stats() -> dict[str, Any]:
        return store.stats()

    @app.post("/export-verified")
    def export_verified() -> dict[str, Any]:
        return store.export_verified(default_verified)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve_review_api(bench_path: str | Path, host: str = "127.0.0.1", port: int = 8777, *,
                     videos: dict[str, dict[str, Any]] | None = None,
                     ui_dir: str | Path | None = None) -> None:
    """Blocking uvicorn server over the bench store."""
    import uvicorn

    store = BenchStore(bench_path, videos=videos)
    app = create_app(store, ui_dir=ui_dir)
    logger.info("review service on http://%s:%d (%d items)", host, port, len(store.items))
    uvicorn.run(app, host=host, port=port, log_level="warning")
