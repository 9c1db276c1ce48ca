"""Multi-modal context graphs: structured cross-modal evidence per clip.

The graph splits a clip's world into objects the person touched (with the
action line as evidence), objects merely visible, and sound events tied to
a textual source. Parsing normalizes the loose category vocabulary models
emit; validation checks disjointness and that every foreground sound's
source is actually present in the channel it claims as evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from .errors import StructuredOutputError
from .gateway import ChatRequest, DecodeParams, user_request
from .prompts import render_mcg_prompt
from .schemas import extract_json_value, validate

if TYPE_CHECKING:
    from .enrichment import EnhancedNarrations

CATEGORY_FOREGROUND_ACTION = "foreground_action"
CATEGORY_FOREGROUND_OBJECT = "foreground_object"
CATEGORY_BACKGROUND_AMBIENT = "background_ambient"

# Models use several spellings for the same three buckets; "Foreground Sound"
# resolves by which channel grounds it.
_CATEGORY_TABLE = {
    "action sound": CATEGORY_FOREGROUND_ACTION,
    "object sound": CATEGORY_FOREGROUND_OBJECT,
    "ambient sound": CATEGORY_BACKGROUND_AMBIENT,
    "background sound": CATEGORY_BACKGROUND_AMBIENT,
    CATEGORY_FOREGROUND_ACTION: CATEGORY_FOREGROUND_ACTION,
    CATEGORY_FOREGROUND_OBJECT: CATEGORY_FOREGROUND_OBJECT,
    CATEGORY_BACKGROUND_AMBIENT: CATEGORY_BACKGROUND_AMBIENT,
}


@dataclass(frozen=True)
class SoundEvent:
    acoustic_description: str
    source: str
    evidence_source: str  # action_narration | video_caption
    sound_category: str   # normalized bucket
    # original spelling, kept only to report normalization; not graph content
    raw_category: str = field(default="", compare=False)

    @property
    def is_foreground(self) -> bool:
        return self.sound_category in (CATEGORY_FOREGROUND_ACTION, CATEGORY_FOREGROUND_OBJECT)


@dataclass(frozen=True)
class MultiModalContextGraph:
    clip_id: str
    interacted_objects: tuple[tuple[str, str], ...]  # (object, action evidence)
    background_objects: tuple[str, ...]
    sounds: tuple[SoundEvent, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "interacted_objects": [list(pair) for pair in self.interacted_objects],
            "background_objects": list(self.background_objects),
            "sounds": [
                {
                    "acoustic_description": s.acoustic_description,
                    "source": s.source,
                    "evidence_source": s.evidence_source,
                    "sound_category": s.sound_category,
                }
                for s in self.sounds
            ],
        }


@dataclass(frozen=True)
class Diagnostic:
    code: str      # DISJOINTNESS | UNGROUNDED_SOURCE | EMPTY_OK | CATEGORY_NORMALIZED
    level: str     # error | info
    path: str
    message: str


def build_mcg_prompt(enhanced: "EnhancedNarrations", model_id: str,
                     decode: DecodeParams | None = None) -> ChatRequest:
    """Render the graph-extraction request for one enriched clip."""
    prompt = render_mcg_prompt(
        enhanced.video_caption, enhanced.image_caption,
        enhanced.audio_caption, enhanced.action_narration,
    )
    return user_request(model_id, prompt, decode=decode or DecodeParams(temperature=0.0),
                        schema_hint="mcg/v1")


def normalize_category(raw: str, evidence_source: str) -> str | None:
    key = raw.strip().lower()
    if key == "foreground sound":
        return (CATEGORY_FOREGROUND_ACTION if evidence_source == "action_narration"
                else CATEGORY_FOREGROUND_OBJECT)
    return _CATEGORY_TABLE.get(key)


def parse_mcg(raw: str, clip_id: str = "") -> MultiModalContextGraph:
    """Parse model output (or stored JSON) into a normalized graph.

    Raises StructuredOutputError listing every offending path; no partially
    valid graph is ever returned.
    """
    value = extract_json_value(raw) if isinstance(raw, str) else raw
    problems = validate("mcg/v1", value)
    if problems:
        raise StructuredOutputError(
            f"context graph violates schema mcg/v1: {'; '.join(problems)}",
            raw_text=raw if isinstance(raw, str) else json.dumps(raw),
            diagnostics=problems,
        )

    sounds = []
    shape_problems: list[str] = []
    for idx, entry in enumerate(value["sounds"]):
        raw_category = entry["sound_category"]
        normalized = normalize_category(raw_category, entry["evidence_source"])
        if normalized is None:
            shape_problems.append(f"$.sounds[{idx}].sound_category: unknown vocabulary {raw_category!r}")
            continue
        source = entry["source"].strip()
        if normalized != CATEGORY_BACKGROUND_AMBIENT and not source:
            shape_problems.append(f"$.sounds[{idx}].source: foreground sounds need a non-empty source")
            continue
        sounds.append(SoundEvent(
            acoustic_description=entry["acoustic_description"].strip(),
            source=source,
            evidence_source=entry["evidence_source"],
            sound_category=normalized,
            raw_category=raw_category,
        ))
    if shape_problems:
        raise StructuredOutputError(
            f"context graph violates mcg/v1 constraints: {'; '.join(shape_problems)}",
            raw_text=raw if isinstance(raw, str) else json.dumps(raw),
            diagnostics=shape_problems,
        )

    return MultiModalContextGraph(
        clip_id=clip_id,
        interacted_objects=tuple((pair[0].strip(), pair[1]) for pair in value["interacted_objects"]),
        background_objects=tuple(obj.strip() for obj in value["background_objects"]),
        sounds=tuple(sounds),
    )


def validate_mcg(graph: MultiModalContextGraph, enhanced: "EnhancedNarrations") -> list[Diagnostic]:
    """Cross-check a parsed graph against its clip's enriched narrations.

    Pure diagnostics, never mutation; the pipeline decides whether an
    error-level finding triggers a re-prompt.
    """
    diags: list[Diagnostic] = []

    interacted_names = {name.strip().lower() for name, _ in graph.interacted_objects}
    for idx, name in enumerate(graph.background_objects):
        if name.strip().lower() in interacted_names:
            diags.append(Diagnostic(
                "DISJOINTNESS", "error", f"$.background_objects[{idx}]",
                f"object {name!r} appears in both the interacted and background lists",
            ))

    channels = {
        "action_narration": enhanced.action_narration.lower(),
        "video_caption": enhanced.video_caption.lower(),
    }
    for idx, sound in enumerate(graph.sounds):
        if sound.is_foreground:
            haystack = channels.get(sound.evidence_source, "")
            if sound.source.lower() not in haystack:
                diags.append(Diagnostic(
                    "UNGROUNDED_SOURCE", "error", f"$.sounds[{idx}].source",
                    f"source {sound.source!r} not found in {sound.evidence_source}",
                ))
        if sound.raw_category and sound.raw_category != sound.sound_category:
            diags.append(Diagnostic(
                "CATEGORY_NORMALIZED", "info", f"$.sounds[{idx}].sound_category",
                f"{sound.raw_category!r} normalized to {sound.sound_category!r}",
            ))

    if not graph.sounds:
        diags.append(Diagnostic("EMPTY_OK", "info", "$.sounds", "clip carries no grounded sound events"))

    return diags


def error_diagnostics(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.level == "error"]
