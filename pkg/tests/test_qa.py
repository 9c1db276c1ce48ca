"""QA generation shapes, sentinel handling, and balanced export."""

from __future__ import annotations

import json
import random

import pytest

from egoavu.errors import QAGenError, StructuredOutputError
from egoavu.fusion import DenseNarration, FusedNarration
from egoavu.gateway import GatewayClient, MockBackend, SequenceBackend
from egoavu.mcg import parse_mcg
from egoavu.mockmodels import respond as scripted_respond
from egoavu.prompts import AVDN_QUESTION, EMPTY_SOUNDS_SENTINEL
from egoavu.qa import (
    QAItem,
    balance_export,
    gen_avdn,
    gen_avh,
    gen_avsn,
    gen_ssa,
    gen_tr_ordering,
    gen_tr_pair,
    make_qa_id,
    validate_item_shape,
)

from example_graph import EXAMPLE_GRAPH_RAW


@pytest.fixture
def client() -> GatewayClient:
    return GatewayClient(MockBackend(default=scripted_respond))


def graph(clip_id="demo:0000"):
    return parse_mcg(EXAMPLE_GRAPH_RAW, clip_id=clip_id)


def fused(clip_id="demo:0000", caption="The person turned on the tap and rinsed both hands, "
          "a water flowing sound accompanying the rinse, before opening the door."):
    return FusedNarration(clip_id, caption, clip_id)


CAPTIONS = [
    "The person was wiping the counter with a towel, a scraping sound underneath.",
    "The person was pouring water into the kettle next to the stove.",
    "The person was folding laundry by the window, fabric rustling sound audible.",
    "The person was slicing bread on the board with a knife.",
]


class TestSSA:
    def test_answer_opens_with_event_count(self, client):
        item = gen_ssa(client, "qa-writer", graph(), fused(), (0.0, 12.0), "v1")
        assert item is not None
        assert item.task == "SSA"
        first_sentence = item.answer.split(".")[0].lower()
        assert "three" in first_sentence or "3" in first_sentence

    def test_empty_sounds_logs_sentinel_and_yields_nothing(self, client, caplog):
        empty = parse_mcg('{"interacted_objects": [], "background_objects": [], "sounds": []}',
                          clip_id="demo:0009")
        with caplog.at_level("INFO", logger="egoavu.qa"):
            item = gen_ssa(client, "qa-writer", empty, fused("demo:0009"), (0.0, 12.0), "v1")
        assert item is None
        assert EMPTY_SOUNDS_SENTINEL in caplog.text

    def test_missing_fused_caption_rejected(self, client):
        with pytest.raises(QAGenError):
            gen_ssa(client, "qa-writer", graph(), FusedNarration("demo:0000", "", "demo:0000"),
                    (0.0, 12.0), "v1")


class TestAVH:
    def test_pair_shapes(self, client):
        factual, hallucinated = gen_avh(client, "qa-writer", CAPTIONS[0], "sound", "v1", (0.0, 90.0))
        assert factual.answer == "Yes" and factual.subtype == "sound:factual"
        assert hallucinated.answer == "No" and hallucinated.subtype == "sound:hallucinated"
        assert factual.options is None

    def test_factual_question_uses_caption_keyword(self, client):
        caption = "The person opened a valve, a hissing sound escaping from the pipe."
        factual, _ = gen_avh(client, "qa-writer", caption, "sound", "v1", (0.0, 30.0))
        assert "hissing" in factual.question

    def test_two_factual_answers_trigger_one_reprompt_then_error(self):
        bad = json.dumps([
            {"question": "q1", "question type": "Factual", "answers": "Yes"},
            {"question": "q2", "question type": "Factual", "answers": "Yes"},
        ])
        backend = SequenceBackend([bad, bad])
        with pytest.raises(StructuredOutputError):
            gen_avh(GatewayClient(backend), "qa-writer", CAPTIONS[0], "sound", "v1", (0.0, 30.0))
        assert len(backend.calls) == 2

    def test_empty_caption_rejected(self, client):
        with pytest.raises(QAGenError):
            gen_avh(client, "qa-writer", "   ", "object", "v1", (0.0, 30.0))


class TestTRPair:
    def test_before_and_after_items(self, client):
        before, after = gen_tr_pair(client, "qa-writer", CAPTIONS, "Action-Sound", "v1", (0.0, 100.0), seed=3)
        assert before.subtype == "before:Action-Sound"
        assert after.subtype == "after:Action-Sound"
        for item in (before, after):
            assert sorted(item.options) == ["A", "B", "C", "D"]
            assert item.answer in "ABCD"
            assert len({v.lower() for v in item.options.values()}) == 4

    def test_before_question_matches_template(self, client):
        before, _ = gen_tr_pair(client, "qa-writer", CAPTIONS, "Action-Sound", "v1", (0.0, 100.0))
        assert before.question.startswith("What sound can be heard before ")

    def test_single_caption_rejected(self, client):
        with pytest.raises(QAGenError):
            gen_tr_pair(client, "qa-writer", CAPTIONS[:1], "Action-Action", "v1", (0.0, 100.0))

    def test_duplicate_options_detected(self):
        bad = json.dumps([
            {"question": "qb", "answer": "same text", "type": "before",
             "options": ["same text", "other", "third"]},
            {"question": "qa", "answer": "fine", "type": "after",
             "options": ["one", "two", "three"]},
        ])
        backend = SequenceBackend([bad, bad])
        with pytest.raises(StructuredOutputError):
            gen_tr_pair(GatewayClient(backend), "qa-writer", CAPTIONS, "Action-Action", "v1", (0.0, 100.0))

    def test_option_shuffle_is_seeded(self, client):
        first = gen_tr_pair(client, "qa-writer", CAPTIONS, "Action-Object", "v1", (0.0, 100.0), seed=5)
        second = gen_tr_pair(client, "qa-writer", CAPTIONS, "Action-Object", "v1", (0.0, 100.0), seed=5)
        assert first == second


class TestTROrdering:
    def test_four_events_mapped_to_options(self, client):
        item = gen_tr_ordering(client, "qa-writer", CAPTIONS, "v1", (0.0, 100.0))
        assert item is not None
        assert sorted(item.options) == ["A", "B", "C", "D"]
        assert item.answer in "ABCD"

    def test_options_equal_events_exactly(self):
        events = ["first event", "second event", "third event", "fourth event"]
        good = json.dumps({
            "events": events,
            "question": "Which event happened first?",
            "options": {"A": events[1], "B": events[0], "C": events[2], "D": events[3]},
            "answer": "B",
        })
        item = gen_tr_ordering(GatewayClient(SequenceBackend([good])), "qa-writer",
                               CAPTIONS, "v1", (0.0, 100.0))
        assert sorted(item.options.values()) == sorted(events)
        assert item.options[item.answer] == "first event"

    def test_mismatched_option_text_is_validation_error(self):
        events = ["first event", "second event", "third event", "fourth event"]
        bad = json.dumps({
            "events": events,
            "question": "Which event happened first?",
            "options": {"A": "paraphrased!", "B": events[1], "C": events[2], "D": events[3]},
            "answer": "A",
        })
        backend = SequenceBackend([bad, bad])
        with pytest.raises(StructuredOutputError):
            gen_tr_ordering(GatewayClient(backend), "qa-writer", CAPTIONS, "v1", (0.0, 100.0))

    def test_too_few_events_skips_with_diagnostic(self, client, caplog):
        with caplog.at_level("INFO", logger="egoavu.qa"):
            item = gen_tr_ordering(client, "qa-writer", CAPTIONS[:2], "v1", (0.0, 100.0))
        assert item is None
        assert "skipping" in caplog.text


class TestNarrationTasks:
    def test_avsn_question_matches_span_template(self):
        item = gen_avsn(fused(), (240.0, 250.0), "v1", video_duration=400.0)
        assert item.question == ("Between 240 and 250 seconds, describe the person's surroundings, "
                                 "actions, and the sounds that can be heard?")
        assert item.answer == fused().caption

    def test_avsn_span_outside_video(self):
        with pytest.raises(QAGenError):
            gen_avsn(fused(), (240.0, 250.0), "v1", video_duration=245.0)

    def test_avdn_fixed_question_and_dense_answer(self):
        dense = DenseNarration("v1", "At 0 seconds, the person started cooking.", (0.0, 180.0))
        item = gen_avdn(dense)
        assert item.question == AVDN_QUESTION
        assert item.answer == dense.caption
        assert item.span == (0.0, 180.0)

    def test_avdn_missing_dense_rejected(self):
        with pytest.raises(QAGenError):
            gen_avdn(DenseNarration("v1", "   ", (0.0, 1.0)))


def _items_for_balance(n_videos=20, per_task=5, seed=1) -> list[QAItem]:
    rng = random.Random(seed)
    items = []
    for v in range(n_videos):
        video_id = f"v{v:03d}"
        for task in ("SSA", "AVSN", "AVDN", "TR", "AVH"):
            for k in range(per_task):
                question = f"{task} question {k} about {video_id}?"
                options = None
                answer = f"an answer {rng.random():.3f}"
                if task == "TR":
                    options = {"A": "one", "B": "two", "C": "three", "D": "four"}
                    answer = rng.choice("ABCD")
                if task == "AVH":
                    answer = rng.choice(["Yes", "No"])
                items.append(QAItem(
                    qa_id=make_qa_id(video_id, task, None, question),
                    video_id=video_id,
                    span=(0.0, 100.0),
                    task=task,
                    subtype=None,
                    question=question,
                    answer=answer,
                    options=options,
                ))
    return items


class TestBalanceExport:
    def test_equal_task_counts_in_instruct(self):
        instruct, _ = balance_export(_items_for_balance(), split_ratio=0.8, seed=9)
        counts = {}
        for item in instruct:
            counts[item.task] = counts.get(item.task, 0) + 1
        assert len(set(counts.values())) == 1

    def test_same_seed_identical_splits(self):
        items = _items_for_balance()
        first = balance_export(items, 0.8, seed=4)
        second = balance_export(items, 0.8, seed=4)
        assert first == second

    def test_video_disjointness_over_many_seeds(self):
        items = _items_for_balance(n_videos=30)
        for seed in range(10):
            instruct, bench = balance_export(items, 0.7, seed=seed)
            overlap = {i.video_id for i in instruct} & {i.video_id for i in bench}
            assert overlap == set()

    def test_bench_items_start_unreviewed(self):
        _, bench = balance_export(_items_for_balance(), 0.8, seed=2)
        assert bench and all(i.verification == "unreviewed" and i.split == "bench" for i in bench)

    def test_empty_input(self):
        assert balance_export([], 0.8, 0) == ([], [])


class TestShapeValidation:
    def test_generated_items_pass(self, client):
        items = [
            gen_avsn(fused(), (10.0, 20.0), "v1", video_duration=100.0),
            gen_avdn(DenseNarration("v1", "At 3 seconds, something happened.", (0.0, 90.0))),
            *gen_avh(client, "qa-writer", CAPTIONS[0], "action", "v1", (0.0, 90.0)),
            *gen_tr_pair(client, "qa-writer", CAPTIONS, "Action-Action", "v1", (0.0, 90.0)),
        ]
        for item in items:
            assert validate_item_shape(item) == []

    def test_bad_tr_shape_detected(self):
        item = QAItem("x", "v1", (0.0, 1.0), "TR", "ordering", "q?", "E",
                      options={"A": "1", "B": "2", "C": "3", "D": "4"})
        assert any("A-D" in p for p in validate_item_shape(item))

    def test_bad_avh_answer_detected(self):
        item = QAItem("x", "v1", (0.0, 1.0), "AVH", "sound:factual", "q?", "Maybe")
        assert validate_item_shape(item)
