"""Scoring candidate-model responses against a benchmark split.

Closed-ended tasks go through the extraction cascade and plain accuracy;
open-ended tasks get reference metrics plus a 1-5 grader verdict. The
report mirrors the per-task column layout (grader score S, METEOR M,
ROUGE-L R for open tasks; accuracy for closed tasks) with per-modality
subset accuracies for the closed families.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .diversity import tokenize
from .errors import DataError, GatewayError, JudgeError, StructuredOutputError
from .extraction import EXTRACTOR_VERSION, extract_binary, extract_choice
from .gateway import DecodeParams, GatewayClient, user_request
from .metrics import meteor, rouge_l
from .prompts import render_judge_prompt
from .qa import QAItem

logger = logging.getLogger(__name__)

OPEN_TASKS = ("SSA", "AVSN", "AVDN")
CLOSED_TASKS = ("TR", "AVH")

# Closed-task subtype prefixes/pair-types mapped to modality subsets.
_TR_MODALITY = {"Action-Action": "action", "Action-Object": "object", "Action-Sound": "sound"}
SSA_ERROR_CATEGORIES = ("sound_error", "source_error")


@dataclass
class EvalRecord:
    qa_id: str
    raw_response: str
    extracted: str | None = None
    correct: bool | None = None
    judge_rating: int | None = None
    judge_reason: str | None = None
    rouge_l: float | None = None
    meteor: float | None = None
    judge_flagged: bool = False

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class TaskAggregate:
    task: str
    count: int
    judge_mean: float | None = None
    meteor_mean: float | None = None
    rouge_mean: float | None = None
    accuracy: float | None = None


@dataclass
class Report:
    per_task: dict[str, TaskAggregate]
    subset_accuracy: dict[str, dict[str, float]]
    ssa_error_tally: dict[str, int] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    extractor_version: str = EXTRACTOR_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "per_task": {t: dict(a.__dict__) for t, a in self.per_task.items()},
            "subset_accuracy": self.subset_accuracy,
            "ssa_error_tally": self.ssa_error_tally,
            "counts": self.counts,
            "extractor_version": self.extractor_version,
        }


def modality_of(item: QAItem) -> str | None:
    """action/object/sound subset label for closed items, else None."""
    if not item.subtype:
        return None
    if item.task == "AVH":
        return item.subtype.split(":", 1)[0]
    if item.task == "TR":
        if item.subtype == "ordering":
            return None
        _, _, pair_type = item.subtype.partition(":")
        return _TR_MODALITY.get(pair_type)
    return None


def score_closed_record(item: QAItem, response: str) -> EvalRecord:
    """Extract and grade one closed-ended response; failures score incorrect."""
    if item.task == "TR":
        extracted = extract_choice(response)
        correct = extracted is not None and extracted == item.answer
    else:
        extracted = extract_binary(response)
        correct = extracted is not None and extracted == item.answer.lower()
    return EvalRecord(qa_id=item.qa_id, raw_response=response, extracted=extracted, correct=correct)


def score_open_record(item: QAItem, response: str) -> EvalRecord:
    cand = tokenize(response)
    ref = tokenize(item.answer)
    return EvalRecord(
        qa_id=item.qa_id,
        raw_response=response,
        rouge_l=rouge_l(cand, ref),
        meteor=meteor(cand, ref),
    )


def judge_open(
    client: GatewayClient,
    model_id: str,
    question: str,
    grounding_answer: str,
    predicted_answer: str,
    *,
    decode: DecodeParams | None = None,
    max_repair: int = 1,
) -> tuple[int, str]:
    """Grade one open answer on the 1-5 rubric; invalid output raises."""
    prompt = render_judge_prompt(question, grounding_answer, predicted_answer)
    request = user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0))
    try:
        value = client.complete_structured(request, "judge/v1", max_repair=max_repair)
    except (StructuredOutputError, GatewayError) as exc:
        raise JudgeError(f"grader failed for item: {exc}") from exc
    rating = int(value["rating"])
    if not 1 <= rating <= 5:
        raise JudgeError(f"grader rating {rating} outside 1-5")
    return rating, str(value["reason"])


def score_records(
    items: Sequence[QAItem],
    responses: Mapping[str, str],
    *,
    judge_client: GatewayClient | None = None,
    judge_model: str = "",
    decode: DecodeParams | None = None,
) -> list[EvalRecord]:
    """Score every item that has a response; judge failures flag the record."""
    records = []
    for item in sorted(items, key=lambda i: i.qa_id):
        if item.qa_id not in responses:
            continue
        response = responses[item.qa_id]
        if item.task in CLOSED_TASKS:
            records.append(score_closed_record(item, response))
            continue
        record = score_open_record(item, response)
        if judge_client is not None:
            try:
                rating, reason = judge_open(
                    judge_client, judge_model, item.question, item.answer, response,
                    decode=decode,
                )
                record.judge_rating = rating
                record.judge_reason = reason
            except JudgeError as exc:
                logger.warning("item %s left unscored by the grader: %s", item.qa_id, exc)
                record.judge_flagged = True
        records.append(record)
    return records


def score_closed(records: Sequence[EvalRecord], items: Sequence[QAItem]) -> dict[str, Any]:
    """Accuracy per closed task and per modality subset."""
    by_id = {item.qa_id: item for item in items}
    task_hits: dict[str, list[bool]] = {}
    subset_hits: dict[str, dict[str, list[bool]]] = {}
    for record in records:
        item = by_id.get(record.qa_id)
        if item is None:
            raise DataError(f"no benchmark item for scored record {record.qa_id}")
        if item.task not in CLOSED_TASKS:
            continue
        if record.correct is None:
            raise DataError(f"closed record {record.qa_id} was never graded")
        task_hits.setdefault(item.task, []).append(record.correct)
        modality = modality_of(item)
        if modality:
            subset_hits.setdefault(item.task, {}).setdefault(modality, []).append(record.correct)
    accuracies = {task: sum(hits) / len(hits) for task, hits in task_hits.items()}
    subsets = {
        task: {mod: sum(hits) / len(hits) for mod, hits in mods.items()}
        for task, mods in subset_hits.items()
    }
    return {"accuracy": accuracies, "subsets": subsets}


def aggregate_report(
    records: Sequence[EvalRecord],
    items: Sequence[QAItem],
    *,
    ssa_error_annotations: Mapping[str, str] | None = None,
) -> Report:
    """Fold scored records into per-task means and subset accuracies."""
    by_id = {item.qa_id: item for item in items}
    per_task: dict[str, TaskAggregate] = {}
    buckets: dict[str, dict[str, list[float]]] = {}
    closed: dict[str, list[bool]] = {}
    subset_hits: dict[str, dict[str, list[bool]]] = {}

    for record in records:
        item = by_id.get(record.qa_id)
        if item is None:
            raise DataError(f"no benchmark item for scored record {record.qa_id}")
        if item.task in CLOSED_TASKS:
            if record.correct is None:
                raise DataError(f"closed record {record.qa_id} was never graded")
            closed.setdefault(item.task, []).append(record.correct)
            modality = modality_of(item)
            if modality:
                subset_hits.setdefault(item.task, {}).setdefault(modality, []).append(record.correct)
            continue
        bucket = buckets.setdefault(item.task, {"judge": [], "meteor": [], "rouge": []})
        if record.judge_rating is not None:
            bucket["judge"].append(float(record.judge_rating))
        if record.meteor is not None:
            bucket["meteor"].append(record.meteor)
        if record.rouge_l is not None:
            bucket["rouge"].append(record.rouge_l)

    def mean(values: list[float]) -> float | None:
        return sum(values) / len(values) if values else None

    for task, bucket in buckets.items():
        count = max(len(bucket["meteor"]), len(bucket["rouge"]), len(bucket["judge"]))
        per_task[task] = TaskAggregate(
            task=task,
            count=count,
            judge_mean=mean(bucket["judge"]),
            meteor_mean=mean(bucket["meteor"]),
            rouge_mean=mean(bucket["rouge"]),
        )
    for task, hits in closed.items():
        per_task[task] = TaskAggregate(task=task, count=len(hits), accuracy=sum(hits) / len(hits))

    subsets = {
        task: {mod: sum(hits) / len(hits) for mod, hits in sorted(mods.items())}
        for task, mods in subset_hits.items()
    }

    tally: dict[str, int] = {}
    if ssa_error_annotations:
        for qa_id, category in ssa_error_annotations.items():
            if category not in SSA_ERROR_CATEGORIES:
                raise DataError(f"unknown error category {category!r} for {qa_id}")
            tally[category] = tally.get(category, 0) + 1

    counts = {"records": len(records), "items": len(items)}
    return Report(per_task=per_task, subset_accuracy=subsets, ssa_error_tally=tally, counts=counts)


_COLUMNS = (
    ("SSA", "S", "judge_mean"),
    ("AVDN", "S", "judge_mean"),
    ("AVDN", "M", "meteor_mean"),
    ("AVDN", "R", "rouge_mean"),
    ("AVSN", "S", "judge_mean"),
    ("AVSN", "M", "meteor_mean"),
    ("AVSN", "R", "rouge_mean"),
    ("TR", "Acc.", "accuracy"),
    ("AVH", "Acc.", "accuracy"),
)


def render_table(report: Report) -> str:
    """Plain-text one-row summary in the standard column order."""
    headers = [f"{task}-{metric}" for task, metric, _ in _COLUMNS]
    values = []
    for task, _, attr in _COLUMNS:
        aggregate = report.per_task.get(task)
        value = getattr(aggregate, attr) if aggregate else None
        values.append("-" if value is None else f"{value:.4f}")
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    header_row = " | ".join(h.ljust(w) for h, w in zip(headers, widths))
    value_row = " | ".join(v.ljust(w) for v, w in zip(values, widths))
    rule = "-+-".join("-" * w for w in widths)
    lines = [header_row, rule, value_row]
    for task in sorted(report.subset_accuracy):
        parts = ", ".join(f"{mod}={acc:.4f}" for mod, acc in report.subset_accuracy[task].items())
        lines.append(f"{task} subsets: {parts}")
    if report.ssa_error_tally:
        parts = ", ".join(f"{cat}={n}" for cat, n in sorted(report.ssa_error_tally.items()))
        lines.append(f"SSA error categories: {parts}")
    lines.append(f"extractor: {report.extractor_version}")
    return "\n".join(lines)
