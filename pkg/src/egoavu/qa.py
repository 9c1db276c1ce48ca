"""QA generation across the five task families, plus split export.

Question families: sound-source association (SSA) and segment/dense
narration (AVSN/AVDN) are open-ended; temporal reasoning (TR) and
hallucination probes (AVH) are closed-ended. Narration tasks reuse the
fused captions directly as answers; everything else goes through the
gateway with schema-validated outputs and one semantic re-prompt.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

from .errors import QAGenError, StructuredOutputError
from .fusion import DenseNarration, FusedNarration
from .gateway import ChatRequest, DecodeParams, GatewayClient, request_digest, user_request
from .mcg import MultiModalContextGraph
from .prompts import (
    AVDN_QUESTION,
    AVSN_QUESTION_TEMPLATE,
    EMPTY_SOUNDS_SENTINEL,
    TR_PAIR_TYPES,
    format_seconds,
    render_avh_prompt,
    render_ssa_prompt,
    render_tr_ordering_prompt,
    render_tr_pair_prompt,
)

logger = logging.getLogger(__name__)

TASKS = ("SSA", "AVSN", "AVDN", "TR", "AVH")
AVH_CATEGORIES = ("sound", "action", "object")
CHOICE_LABELS = ("A", "B", "C", "D")

_NUMBER_WORDS = (
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve",
)


@dataclass(frozen=True)
class QAItem:
    qa_id: str
    video_id: str
    span: tuple[float, float]
    task: str
    subtype: str | None
    question: str
    answer: str
    options: dict[str, str] | None = None
    provenance: dict[str, Any] = field(default_factory=dict)
    split: str | None = None
    verification: str = "unreviewed"

    def to_dict(self) -> dict[str, Any]:
        return {
            "qa_id": self.qa_id,
            "video_id": self.video_id,
            "span": [self.span[0], self.span[1]],
            "task": self.task,
            "subtype": self.subtype,
            "question": self.question,
            "answer": self.answer,
            "options": self.options,
            "provenance": self.provenance,
            "split": self.split,
            "verification": self.verification,
        }

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "QAItem":
        return cls(
            qa_id=row["qa_id"],
            video_id=row["video_id"],
            span=(float(row["span"][0]), float(row["span"][1])),
            task=row["task"],
            subtype=row.get("subtype"),
            question=row["question"],
            answer=row["answer"],
            options=row.get("options"),
            provenance=row.get("provenance", {}),
            split=row.get("split"),
            verification=row.get("verification", "unreviewed"),
        )


def make_qa_id(video_id: str, task: str, subtype: str | None, question: str) -> str:
    payload = f"{video_id}|{task}|{subtype or ''}|{question}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _provenance(request: ChatRequest, source_ids: Sequence[str]) -> dict[str, Any]:
    return {
        "prompt_digest": request_digest(request)[:16],
        "model_id": request.model_id,
        "source_ids": list(source_ids),
    }


def _checked_structured(
    client: GatewayClient,
    request: ChatRequest,
    schema_id: str,
    check,
    *,
    max_repair: int = 1,
) -> tuple[Any, ChatRequest]:
    """Structured completion plus a semantic check with one re-prompt."""
    value = client.complete_structured(request, schema_id, max_repair=max_repair)
    problems = check(value)
    if not problems:
        return value, request
    retry = request.with_followup(
        "The JSON was structurally valid but wrong in content. Fix these problems and "
        f"reply with only the corrected JSON: {'; '.join(problems)}"
    )
    value = client.complete_structured(retry, schema_id, max_repair=max_repair)
    problems = check(value)
    if problems:
        raise StructuredOutputError(
            f"{schema_id} output failed content checks after re-prompt: {'; '.join(problems)}",
            diagnostics=problems,
        )
    return value, retry


def _shuffle_options(correct: str, distractors: Sequence[str], rng: random.Random) -> tuple[dict[str, str], str]:
    """Seeded shuffle and A-D relabeling; returns (options, answer label)."""
    pool = [correct, *distractors]
    rng.shuffle(pool)
    options = {label: text for label, text in zip(CHOICE_LABELS, pool)}
    answer_label = CHOICE_LABELS[pool.index(correct)]
    return options, answer_label


def _item_rng(seed: int, *parts: str) -> random.Random:
    return random.Random(":".join((str(seed), *parts)))


def gen_ssa(
    client: GatewayClient,
    model_id: str,
    graph: MultiModalContextGraph,
    fused: FusedNarration,
    span: tuple[float, float],
    video_id: str,
    *,
    decode: DecodeParams | None = None,
) -> QAItem | None:
    """Sound-source association item, or None when the clip has no sounds.

    The empty-sounds sentinel is logged verbatim so downstream audits can
    distinguish "no item generated" from "generation failed".
    """
    if not fused.caption:
        raise QAGenError(f"clip {graph.clip_id} has no fused caption for SSA")
    if not graph.sounds:
        logger.info('%s (clip %s)', EMPTY_SOUNDS_SENTINEL, graph.clip_id)
        return None
    prompt = render_ssa_prompt(fused.caption, graph.to_dict())
    request = user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0))

    expected = len(graph.sounds)

    def check(value: Any) -> list[str]:
        first_sentence = value["answer"].split(".")[0].lower()
        word = _NUMBER_WORDS[expected] if expected < len(_NUMBER_WORDS) else None
        if str(expected) in first_sentence or (word and word in first_sentence):
            return []
        return [f"the answer must open by stating that {expected} grounded sound events are present"]

    value, request = _checked_structured(client, request, "ssa/v1", check)
    question = value["question"].strip()
    return QAItem(
        qa_id=make_qa_id(video_id, "SSA", None, question),
        video_id=video_id,
        span=span,
        task="SSA",
        subtype=None,
        question=question,
        answer=value["answer"].strip(),
        provenance=_provenance(request, [graph.clip_id]),
    )


def gen_avh(
    client: GatewayClient,
    model_id: str,
    caption: str,
    category: str,
    video_id: str,
    span: tuple[float, float],
    *,
    source_id: str = "",
    decode: DecodeParams | None = None,
) -> tuple[QAItem, QAItem]:
    """One factual (Yes) and one hallucinated (No) probe for a category."""
    if not caption.strip():
        raise QAGenError(f"empty caption for hallucination probes on video {video_id}")
    if category not in AVH_CATEGORIES:
        raise QAGenError(f"unknown hallucination category {category!r}")
    prompt = render_avh_prompt(caption, category)
    request = user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0))

    def check(value: Any) -> list[str]:
        kinds = sorted(entry["question type"] for entry in value)
        if kinds != ["Factual", "Hallucinated"]:
            return ["exactly one Factual and one Hallucinated question are required"]
        problems = []
        for entry in value:
            expected = "Yes" if entry["question type"] == "Factual" else "No"
            if entry["answers"] != expected:
                problems.append(f'{entry["question type"]} questions must answer "{expected}"')
        return problems

    value, request = _checked_structured(client, request, "avh/v1", check)
    items = []
    for entry in sorted(value, key=lambda e: e["question type"]):  # Factual first
        kind = entry["question type"].lower()
        subtype = f"{category}:{kind}"
        question = entry["question"].strip()
        items.append(QAItem(
            qa_id=make_qa_id(video_id, "AVH", subtype, question),
            video_id=video_id,
            span=span,
            task="AVH",
            subtype=subtype,
            question=question,
            answer=entry["answers"],
            provenance=_provenance(request, [source_id] if source_id else []),
        ))
    return items[0], items[1]


def gen_tr_pair(
    client: GatewayClient,
    model_id: str,
    clip_captions: Sequence[str],
    pair_type: str,
    video_id: str,
    span: tuple[float, float],
    *,
    seed: int = 0,
    source_ids: Sequence[str] = (),
    decode: DecodeParams | None = None,
) -> tuple[QAItem, QAItem]:
    """A before/after question pair with four shuffled options each."""
    if len(clip_captions) < 2:
        raise QAGenError(f"temporal pairs need >= 2 clip captions, got {len(clip_captions)}")
    if pair_type not in TR_PAIR_TYPES:
        raise QAGenError(f"unknown temporal pair type {pair_type!r}")
    prompt = render_tr_pair_prompt(clip_captions, pair_type)
    request = user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0))

    def check(value: Any) -> list[str]:
        directions = sorted(entry["type"] for entry in value)
        if directions != ["after", "before"]:
            return ['exactly one "before" and one "after" question are required']
        problems = []
        for entry in value:
            texts = [entry["answer"], *entry["options"]]
            if len({t.strip().lower() for t in texts}) != len(texts):
                problems.append(f'{entry["type"]} question has duplicate option texts')
        return problems

    value, request = _checked_structured(client, request, "tr/v1", check)
    items = []
    for entry in sorted(value, key=lambda e: e["type"]):  # after, before
        direction = entry["type"]
        subtype = f"{direction}:{pair_type}"
        question = entry["question"].strip()
        rng = _item_rng(seed, video_id, "TR", subtype, question)
        options, answer_label = _shuffle_options(entry["answer"].strip(),
                                                 [o.strip() for o in entry["options"]], rng)
        items.append(QAItem(
            qa_id=make_qa_id(video_id, "TR", subtype, question),
            video_id=video_id,
            span=span,
            task="TR",
            subtype=subtype,
            question=question,
            answer=answer_label,
            options=options,
            provenance=_provenance(request, source_ids),
        ))
    before = next(i for i in items if i.subtype.startswith("before"))
    after = next(i for i in items if i.subtype.startswith("after"))
    return before, after


def gen_tr_ordering(
    client: GatewayClient,
    model_id: str,
    clip_captions: Sequence[str],
    video_id: str,
    span: tuple[float, float],
    *,
    seed: int = 0,
    source_ids: Sequence[str] = (),
    decode: DecodeParams | None = None,
) -> QAItem | None:
    """Event-ordering MCQ; skips (with a diagnostic) below four events."""
    if len(clip_captions) < 4:
        logger.info("skipping event-ordering question for %s: only %d clip captions",
                    video_id, len(clip_captions))
        return None
    prompt = render_tr_ordering_prompt(clip_captions)
    request = user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0))

    def check(value: Any) -> list[str]:
        events = value["events"]
        option_texts = [value["options"][label] for label in CHOICE_LABELS]
        problems = []
        if sorted(option_texts) != sorted(events):
            problems.append("each option must be the exact description provided in the events list")
        if len(set(events)) != len(events):
            problems.append("the four events must be distinct")
        return problems

    value, request = _checked_structured(client, request, "tr-mcq/v1", check)
    question = value["question"].strip()
    correct_text = value["options"][value["answer"]]
    distractors = [value["options"][label] for label in CHOICE_LABELS if label != value["answer"]]
    rng = _item_rng(seed, video_id, "TR", "ordering", question)
    options, answer_label = _shuffle_options(correct_text, distractors, rng)
    return QAItem(
        qa_id=make_qa_id(video_id, "TR", "ordering", question),
        video_id=video_id,
        span=span,
        task="TR",
        subtype="ordering",
        question=question,
        answer=answer_label,
        options=options,
        provenance=_provenance(request, source_ids),
    )


def gen_avsn(fused: FusedNarration, span: tuple[float, float], video_id: str,
             video_duration: float | None = None) -> QAItem:
    """Segment narration item: templated question, fused caption as answer."""
    if video_duration is not None and span[1] > video_duration + 1e-9:
        raise QAGenError(
            f"span [{span[0]}, {span[1]}] exceeds video {video_id} duration {video_duration}"
        )
    question = AVSN_QUESTION_TEMPLATE.format(
        start=format_seconds(span[0]), end=format_seconds(span[1])
    )
    return QAItem(
        qa_id=make_qa_id(video_id, "AVSN", None, question),
        video_id=video_id,
        span=span,
        task="AVSN",
        subtype=None,
        question=question,
        answer=fused.caption,
        provenance={"prompt_digest": "", "model_id": "", "source_ids": [fused.clip_id]},
    )


def gen_avdn(dense: DenseNarration) -> QAItem:
    """Dense narration item over the whole covered span."""
    if not dense.caption.strip():
        raise QAGenError(f"video {dense.video_id} has no dense narration")
    return QAItem(
        qa_id=make_qa_id(dense.video_id, "AVDN", None, AVDN_QUESTION),
        video_id=dense.video_id,
        span=dense.covered_span,
        task="AVDN",
        subtype=None,
        question=AVDN_QUESTION,
        answer=dense.caption,
        provenance={"prompt_digest": "", "model_id": "", "source_ids": [dense.video_id]},
    )


def validate_item_shape(item: QAItem) -> list[str]:
    """Task-specific shape checks every exported item must pass."""
    problems = []
    if item.task not in TASKS:
        problems.append(f"unknown task {item.task!r}")
    if item.task == "TR":
        if not item.options or sorted(item.options) != list(CHOICE_LABELS):
            problems.append("temporal reasoning items need exactly four options labeled A-D")
        if item.answer not in CHOICE_LABELS:
            problems.append(f"temporal reasoning answer must be one of A-D, got {item.answer!r}")
    elif item.task == "AVH":
        if item.answer not in ("Yes", "No"):
            problems.append(f'hallucination answers must be "Yes" or "No", got {item.answer!r}')
        if item.options:
            problems.append("hallucination items carry no options")
    else:
        if item.options:
            problems.append(f"{item.task} items carry no options")
        if not item.answer.strip():
            problems.append(f"{item.task} answer must be non-empty")
    if item.task == "AVSN":
        expected = AVSN_QUESTION_TEMPLATE.format(
            start=format_seconds(item.span[0]), end=format_seconds(item.span[1])
        )
        if item.question != expected:
            problems.append("segment narration question does not match the template for its span")
    return problems


def balance_export(
    items: Sequence[QAItem],
    split_ratio: float = 0.8,
    seed: int = 0,
) -> tuple[list[QAItem], list[QAItem]]:
    """Partition by video and equalize per-task counts on the training side.

    Videos are split first so no video contributes to both sides, then the
    instruct side draws the same number of items from every task present
    (the per-task minimum), seeded and order-independent. Bench items keep
    everything from their videos and start unreviewed.
    """
    if not items:
        return [], []
    videos = sorted({item.video_id for item in items})
    rng = random.Random(seed)
    shuffled = videos[:]
    rng.shuffle(shuffled)
    n_instruct = round(split_ratio * len(shuffled))
    if len(shuffled) > 1:
        n_instruct = min(max(n_instruct, 1), len(shuffled) - 1)
    instruct_videos = set(shuffled[:n_instruct])

    instruct_pool = sorted((i for i in items if i.video_id in instruct_videos), key=lambda i: i.qa_id)
    bench_pool = sorted((i for i in items if i.video_id not in instruct_videos), key=lambda i: i.qa_id)

    by_task: dict[str, list[QAItem]] = {}
    for item in instruct_pool:
        by_task.setdefault(item.task, []).append(item)
    if by_task:
        quota = min(len(group) for group in by_task.values())
        draw_rng = random.Random(f"{seed}:instruct-draw")
        instruct: list[QAItem] = []
        for task in sorted(by_task):
            group = by_task[task]
            chosen = group if len(group) == quota else draw_rng.sample(group, quota)
            instruct.extend(chosen)
        instruct.sort(key=lambda i: i.qa_id)
    else:
        instruct = []

    instruct = [replace(i, split="instruct") for i in instruct]
    bench = [replace(i, split="bench", verification="unreviewed") for i in bench_pool]
    return instruct, bench
