"""Scripted responder backing the offline mock backend.

Every pipeline stage can run with no endpoint: the responder inspects the
request (schema hint plus the JSON payload the prompt embeds) and fabricates
a plausible, schema-valid reply. Output is a pure function of the request
text, seeded by the request digest, so full runs are byte-reproducible.

Conventions the fixture corpus can rely on:
- audio captions for media locators containing "quiet" describe silence,
  which flows through to an empty sounds list and the SSA sentinel;
- locators containing "static" get constant repetitive captions on every
  channel, driving that video's lexical diversity under any threshold;
- all other audio captions are comma-separated "<x> sound" phrases;
- image captions are comma-separated object lists.
"""

from __future__ import annotations

import random
import re
from typing import Any

from .gateway import ChatRequest, request_digest
from .prompts import (
    AUDIO_CAPTION_PROMPT,
    IMAGE_CAPTION_PROMPT,
    VIDEO_CAPTION_PROMPT,
    extract_prompt_input,
    format_seconds,
)
from .records import dumps_record

SOUND_WORDS = ("hissing", "tapping", "scraping", "beeping", "clinking",
               "rustling", "humming", "splashing", "crackling", "whirring")
OBJECT_WORDS = ("cup", "knife", "pan", "sponge", "towel", "microwave", "cabinet",
                "kettle", "plate", "broom", "bucket", "scissors")
ACTION_WORDS = ("wiping", "twisting", "squeezing", "stirring", "pouring",
                "scrubbing", "folding", "slicing", "shaking")
PLACE_WORDS = ("kitchen", "garage", "garden", "workshop", "pantry", "yard")

_TIMESTAMP_PREFIX = re.compile(r"^\[[\d.]+s\]\s*")
_SOUND_PHRASE = re.compile(r"\b(?!(?:a|an|the)\s)([a-z]+) sound\b")


def _rng(request: ChatRequest) -> random.Random:
    return random.Random(request_digest(request))


def _prompt_text(request: ChatRequest) -> str:
    return "\n".join(m.text for m in request.messages)


def _payload(request: ChatRequest) -> Any:
    return extract_prompt_input(_prompt_text(request))


def _action_lines(action_narration: str) -> list[str]:
    lines = []
    for line in action_narration.splitlines():
        text = _TIMESTAMP_PREFIX.sub("", line).strip()
        if text:
            lines.append(text)
    return lines


def _person_phrase(action_text: str) -> str:
    return action_text.replace("#C C", "the person").strip()


def _first_clause(sentence: str) -> str:
    clause = re.split(r"[.;]", sentence, maxsplit=1)[0]
    return clause.strip()


def respond(request: ChatRequest) -> str:
    """Entry point used as the MockBackend default."""
    hint = request.schema_hint
    if hint == "mcg/v1":
        return _respond_mcg(request)
    if hint == "fusion/v1":
        return _respond_fusion(request)
    if hint == "ssa/v1":
        return _respond_ssa(request)
    if hint == "avh/v1":
        return _respond_avh(request)
    if hint == "tr/v1":
        return _respond_tr_pair(request)
    if hint == "tr-mcq/v1":
        return _respond_tr_ordering(request)
    if hint == "judge/v1":
        return _respond_judge(request)
    text = _prompt_text(request)
    if text.startswith(IMAGE_CAPTION_PROMPT):
        return _respond_image(request)
    if text.startswith(VIDEO_CAPTION_PROMPT):
        return _respond_video(request)
    if text.startswith(AUDIO_CAPTION_PROMPT):
        return _respond_audio(request)
    if "dense narration" in text:
        return _respond_dense(request)
    return "Understood."


def _attachment_locator(request: ChatRequest) -> str:
    for message in request.messages:
        for att in message.attachments:
            return att.locator
    return ""


def _respond_image(request: ChatRequest) -> str:
    if "static" in _attachment_locator(request).lower():
        return "pot, spoon, stove, counter"
    rng = _rng(request)
    count = rng.randint(4, 6)
    return ", ".join(rng.sample(OBJECT_WORDS, count))


def _respond_video(request: ChatRequest) -> str:
    if "static" in _attachment_locator(request).lower():
        return "The person was stirring in the kitchen as the camera stayed fixed on the pot."
    rng = _rng(request)
    action = rng.choice(ACTION_WORDS)
    place = rng.choice(PLACE_WORDS)
    extra = rng.choice(OBJECT_WORDS)
    return (f"The person was {action} in the {place} as the camera panned across the scene, "
            f"with a {extra} visible on one side.")


def _respond_audio(request: ChatRequest) -> str:
    locator = _attachment_locator(request).lower()
    if "quiet" in locator:
        return "mostly silence with no distinct sound events"
    if "static" in locator:
        return "stirring sound"
    rng = _rng(request)
    phrases = [f"{w} sound" for w in rng.sample(SOUND_WORDS, rng.randint(2, 3))]
    return ", ".join(phrases)


def _respond_mcg(request: ChatRequest) -> str:
    payload = _payload(request)
    actions = _action_lines(payload["action_narration"])

    interacted: list[list[str]] = []
    seen: set[str] = set()
    for action in actions:
        words = re.findall(r"[A-Za-z]+", action.replace("#C C", ""))
        if not words:
            continue
        obj = words[-1].lower()
        if obj in seen:
            continue
        seen.add(obj)
        interacted.append([obj, action])

    background = []
    for name in payload["image_caption"].split(","):
        name = name.strip()
        if name and name.lower() not in seen:
            background.append(name)

    sounds = []
    audio = payload["audio_caption"]
    if "silence" not in audio.lower():
        fragments = [f.strip() for f in audio.split(",") if f.strip()]
        for idx, fragment in enumerate(fragments):
            if actions:
                source = actions[idx % len(actions)]
                sounds.append({
                    "acoustic_description": fragment,
                    "source": source,
                    "evidence_source": "action_narration",
                    "sound_category": "Action Sound",
                })
            else:
                sounds.append({
                    "acoustic_description": fragment,
                    "source": "",
                    "evidence_source": "video_caption",
                    "sound_category": "Ambient Sound",
                })

    return dumps_record({
        "interacted_objects": interacted,
        "background_objects": background,
        "sounds": sounds,
    })


def _respond_fusion(request: ChatRequest) -> str:
    payload = _payload(request)
    graph = payload["context_graph"]
    parts = [payload["video_description"].rstrip(".") + "."]
    for obj, evidence in graph.get("interacted_objects", []):
        parts.append(f"{_person_phrase(evidence).capitalize()}, working with the {obj}.")
    for sound in graph.get("sounds", []):
        source = sound.get("source", "")
        if source:
            parts.append(f"A {sound['acoustic_description']} accompanied this as {_person_phrase(source)}.")
        else:
            parts.append(f"A {sound['acoustic_description']} persisted in the background.")
    background = graph.get("background_objects", [])
    if background:
        parts.append("Nearby were " + ", ".join(background) + ".")
    return dumps_record({"caption": " ".join(parts)})


def _respond_ssa(request: ChatRequest) -> str:
    payload = _payload(request)
    sounds = payload["context_graph"]["sounds"]
    number_words = ("zero", "one", "two", "three", "four", "five", "six",
                    "seven", "eight", "nine", "ten", "eleven", "twelve")
    n = len(sounds)
    count = number_words[n] if n < len(number_words) else str(n)
    first = sounds[0]["acoustic_description"]
    sentences = [f"There are {count} distinct grounded sound events in the clip."
                 if n != 1 else "There is one distinct grounded sound event in the clip."]
    for sound in sounds:
        source = sound.get("source", "")
        if source:
            sentences.append(
                f"The {sound['acoustic_description']} was caused by {_person_phrase(source)}."
            )
        else:
            sentences.append(f"The {sound['acoustic_description']} was an ambient background sound.")
    return dumps_record({
        "question": f"What is the source of the {first} heard in the video?",
        "answer": " ".join(sentences),
    })


def _category_of(request: ChatRequest) -> str:
    text = _prompt_text(request)
    if "sound-related" in text:
        return "sound"
    if "action-related" in text:
        return "action"
    return "object"


def _respond_avh(request: ChatRequest) -> str:
    payload = _payload(request)
    caption = payload["caption"]
    lower = caption.lower()
    category = _category_of(request)

    if category == "sound":
        match = _SOUND_PHRASE.search(lower)
        present = match.group(1) if match else "faint"
        absent = next((w for w in SOUND_WORDS if w not in lower), "droning")
        factual = f"Is there a {present} sound in the video?"
        hallucinated = f"Is there a {absent} sound coming from somewhere in the video?"
    elif category == "action":
        present = next((w for w in ACTION_WORDS if w in lower), "moving")
        absent = next((w for w in ACTION_WORDS if w not in lower), "juggling")
        factual = f"Is the person {present} something in the video?"
        hallucinated = f"Is the person {absent} something in the video?"
    else:
        present = next((w for w in OBJECT_WORDS if w in lower), "item")
        absent = next((w for w in OBJECT_WORDS if w not in lower), "telescope")
        factual = f"Is there a {present} visible in the video?"
        hallucinated = f"Is there a {absent} visible in the video?"

    return dumps_record([
        {"question": factual, "question type": "Factual", "answers": "Yes"},
        {"question": hallucinated, "question type": "Hallucinated", "answers": "No"},
    ])


def _tr_event(caption: str, used: set[str]) -> str:
    event = _first_clause(caption)
    event = re.sub(r"^[Tt]he person (?:was )?", "", event).strip() or event
    base = event
    suffix = 2
    while event.lower() in used:
        event = f"{base} (part {suffix})"
        suffix += 1
    used.add(event.lower())
    return event


def _respond_tr_pair(request: ChatRequest) -> str:
    payload = _payload(request)
    captions = payload["caption_list"]
    pair_type = payload["type"]
    rng = _rng(request)
    used: set[str] = set()
    e1 = _tr_event(captions[0], used)
    e2 = _tr_event(captions[-1], used)

    lower_first = captions[0].lower()
    if pair_type == "Action-Sound":
        match = _SOUND_PHRASE.search(lower_first)
        answer = f"A {match.group(1)} sound" if match else "A soft rustling sound"
        bank = [f"A {w} sound" for w in SOUND_WORDS]
        before_q = f"What sound can be heard before the person {e2}?"
        after_q = f"What sound can be heard after the person {e1}?"
    elif pair_type == "Action-Object":
        present = next((w for w in OBJECT_WORDS if w in lower_first), OBJECT_WORDS[0])
        answer = f"A {present}"
        bank = [f"A {w}" for w in OBJECT_WORDS]
        before_q = f"What objects can be seen before the person performed the {e2} action?"
        after_q = f"What objects can be seen after the person performed the {e1} action?"
    else:
        answer = f"The person was {e1}"
        bank = [f"The person was {w} nearby" for w in ACTION_WORDS]
        before_q = f"What action was the person performing before {e2}?"
        after_q = f"What action did the person perform after {e1}?"

    distractors = [b for b in bank if b.lower() != answer.lower()]
    options = rng.sample(distractors, 3)
    return dumps_record([
        {"question": before_q, "answer": answer, "type": "before", "options": options},
        {"question": after_q, "answer": answer, "type": "after", "options": options},
    ])


def _respond_tr_ordering(request: ChatRequest) -> str:
    payload = _payload(request)
    captions = payload["caption_list"]
    rng = _rng(request)
    used: set[str] = set()
    events = [_tr_event(caption, used) for caption in captions[:4]]
    order = list(range(4))
    rng.shuffle(order)
    labels = ("A", "B", "C", "D")
    options = {labels[i]: events[order[i]] for i in range(4)}
    answer = labels[order.index(0)]
    return dumps_record({
        "events": events,
        "question": "Which event happened first?",
        "options": options,
        "answer": answer,
    })


def _respond_judge(request: ChatRequest) -> str:
    payload = _payload(request)
    grounding = payload["GROUNDING_ANSWER"]
    predicted = payload["PREDICTED_ANSWER"]
    ref = set(re.findall(r"[a-z0-9]+", grounding.lower()))
    cand = set(re.findall(r"[a-z0-9]+", predicted.lower()))
    if grounding.strip() == predicted.strip():
        rating = 5
        reason = "The prediction matches the grounding answer exactly."
    elif not ref or not cand:
        rating = 1
        reason = "The prediction is empty or unrelated to the grounding answer."
    else:
        overlap = len(ref & cand) / len(ref)
        rating = max(1, min(5, 1 + int(overlap * 4.999)))
        reason = f"The prediction covers about {int(overlap * 100)}% of the grounding content."
    return dumps_record({"rating": rating, "reason": reason})


def _respond_dense(request: ChatRequest) -> str:
    payload = _payload(request)
    pieces = []
    for entry in payload:
        start = format_seconds(entry["start_time"])
        caption = entry["caption"].rstrip(".")
        pieces.append(f"At {start} seconds, {caption[0].lower() + caption[1:]}.")
    return " ".join(pieces)
