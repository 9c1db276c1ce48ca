"""Prompt templates for every model-facing stage.

Each renderer produces the full instruction text for one call: graph
extraction, caption fusion, dense narration, the five QA families, and the
grader. Inputs are embedded as JSON at the end of the prompt so the text is
a pure function of its inputs; temperature 0 plus these templates makes
every call reproducible. Renderers must stay deterministic: the mock
backend re-reads the embedded input JSON to script its answers.
"""

from __future__ import annotations

import json
from typing import Any, Sequence

from .errors import QAGenError

INPUT_MARKER = "Here is the input:"

IMAGE_CAPTION_PROMPT = "Identify all the objects visible in the image"
VIDEO_CAPTION_PROMPT = "Describe the video in detail"
AUDIO_CAPTION_PROMPT = "Describe all the sounds heard in detail"

EMPTY_SOUNDS_SENTINEL = "No significant sound is present in the video clip."

AVSN_QUESTION_TEMPLATE = (
    "Between {start} and {end} seconds, describe the person's surroundings, "
    "actions, and the sounds that can be heard?"
)
AVDN_QUESTION = "Describe in detail what the person sees, hears, and does throughout the video."

TR_PAIR_TYPES = ("Action-Action", "Action-Object", "Action-Sound")
TR_TEMPLATES = {
    "Action-Action": {
        "before": "What action was the person performing before <E2>?",
        "after": "What action did the person perform after <E1>?",
    },
    "Action-Object": {
        "before": "What objects can be seen before the person performed the <E2> action?",
        "after": "What objects can be seen after the person performed the <E1> action?",
    },
    "Action-Sound": {
        "before": "What sound can be heard before the person <E2>?",
        "after": "What sound can be heard after the person <E1>?",
    },
}


def _dumps(value: Any) -> str:
    return json.dumps(value, indent=2, sort_keys=True, ensure_ascii=False)


def format_seconds(value: float) -> str:
    """Whole seconds render without a decimal point (e.g. 240, not 240.0)."""
    if float(value).is_integer():
        return str(int(value))
    return f"{value:g}"


_MCG_EXAMPLES = """\
Example 1
Input: {"video_caption": "A kitchen with a person washing up at the sink while a kettle sits on the stove.", "image_caption": "sink, tap, kettle, dish rack, window", "audio_caption": "water running, dishes clinking", "action_narration": "#C C rinses a plate\\n#C C places the plate on the rack"}
Output: {"interacted_objects": [["plate", "#C C rinses a plate"], ["rack", "#C C places the plate on the rack"]], "background_objects": ["sink", "tap", "kettle", "window"], "sounds": [{"acoustic_description": "water running", "source": "#C C rinses a plate", "evidence_source": "action_narration", "sound_category": "Action Sound"}, {"acoustic_description": "dishes clinking", "source": "#C C places the plate on the rack", "evidence_source": "action_narration", "sound_category": "Object Sound"}]}

Example 2 (ungrounded laughter is excluded)
Input: {"video_caption": "A person sweeps a porch; nobody else is visible.", "image_caption": "broom, porch railing, flower pot", "audio_caption": "bristles scraping, a distant giggle", "action_narration": "#C C sweeps the porch with a broom"}
Output: {"interacted_objects": [["broom", "#C C sweeps the porch with a broom"]], "background_objects": ["porch railing", "flower pot"], "sounds": [{"acoustic_description": "bristles scraping", "source": "#C C sweeps the porch with a broom", "evidence_source": "action_narration", "sound_category": "Action Sound"}]}
Note how "giggle" was excluded because it had no grounding evidence in the video caption or action narration.

Example 3 (sound grounded in the video caption)
Input: {"video_caption": "A dog barks at the fence while the person digs in the garden.", "image_caption": "shovel, fence, dog, bushes", "audio_caption": "dog barking, soil being turned", "action_narration": "#C C digs the soil with a shovel"}
Output: {"interacted_objects": [["shovel", "#C C digs the soil with a shovel"]], "background_objects": ["fence", "dog", "bushes"], "sounds": [{"acoustic_description": "dog barking", "source": "A dog barks at the fence", "evidence_source": "video_caption", "sound_category": "Object Sound"}, {"acoustic_description": "soil being turned", "source": "#C C digs the soil with a shovel", "evidence_source": "action_narration", "sound_category": "Action Sound"}]}

Example 4 (no groundable sounds at all)
Input: {"video_caption": "A person reads quietly in an armchair.", "image_caption": "armchair, bookshelf, lamp, rug", "audio_caption": "faint hum", "action_narration": "#C C turns a page"}
Output: {"interacted_objects": [["page", "#C C turns a page"]], "background_objects": ["armchair", "bookshelf", "lamp", "rug"], "sounds": []}

Example 5 (background sound kept, breathing excluded)
Input: {"video_caption": "A person paints a wall indoors.", "image_caption": "paint roller, tray, ladder, window", "audio_caption": "roller squelching, traffic noise, breathing", "action_narration": "#C C rolls paint onto the wall"}
Output: {"interacted_objects": [["wall", "#C C rolls paint onto the wall"]], "background_objects": ["paint roller", "tray", "ladder", "window"], "sounds": [{"acoustic_description": "roller squelching", "source": "#C C rolls paint onto the wall", "evidence_source": "action_narration", "sound_category": "Action Sound"}, {"acoustic_description": "traffic noise", "source": "", "evidence_source": "video_caption", "sound_category": "Ambient Sound"}]}\
"""

MCG_PROMPT_TEMPLATE = """\
Objective: You are an AI assistant tasked with performing a high-fidelity analysis of video content. Your role is to function as an evidence extractor, not an open-world reasoner. You must strictly use the provided captions to identify object interactions and to analyze sounds, grounding every piece of information directly to the source text.

Inputs: You will be provided with a JSON object containing the following four keys:
- Video Caption: Describes the overall visual scene, including events and actions of entities other than the narrator (e.g., animals, other people, environmental events).
- Image Caption: Describes the diverse objects visible in the center frame.
- Audio Caption: A transcript of sounds and audio events.
- Action Narration: Describes the specific actions performed by the primary person (#C C denotes the person).

Task: Analyze the provided captions to generate a structured multimodal context graph in the form of JSON that captures multimodal relationships. For generating the multimodal context graph, follow the instructions mentioned below.

Instructions:
- Identify Interacted Objects: Parse the action narration to find all objects the primary person is described as touching, holding, using, or manipulating. Compile these into the "interacted_objects" list with what action the person performed.
- Identify Background Objects: Take the complete list of objects from the image caption. Create a new list containing only the items from the image caption that are NOT in your "interacted_objects" list. This will be your "background_objects" list.
- Identify Sound-Source Associations: This is a strict, evidence-based process. Ideally there can be two types of sound, sound caused by an action/object or background sound. Your task is to capture both of them for the audio caption.
  A. Find the Grounding Evidence for foreground sound: For each sound in the audio caption, you must search the action narration and video caption to find the specific text that describes the action or event causing it. Look in the action narration for causes related to the primary person's actions. Look in the video caption for causes related to other entities (animals, other people) or general scene events. Ambient sound includes music, background noise, etc. Crucially: if no direct textual evidence can be found in either caption that explains the sound's origin, the sound is a background sound.
  B. Exclude "Unquestionable" Sounds: Even if grounded, do NOT include a sound if it falls into these categories:
     Mundane Biological Sounds: Common sounds like "breathing," "sighing," "swallowing."
     Vague Ambient Noise: like "white noise" or "faint hum."
  C. Determine the sound category: Classify as Foreground Sound (from the human action or visible object) or Background Sound.
  D. Handle Empty Results: If no sounds pass the filtering and grounding process, the "sounds" list in your output must be an empty list ([]).

Human Generated Examples: Here are 5 human created examples for the correct execution.
{examples}

Important Note:
- The source description will contain either the corresponding action or the object that can produce the sound.
- The sound category can be a foreground sound such as "Action Sound" or "Object Sound", or background such as "Ambient Sound".
- Each sound must record its evidence_source as either "action_narration" or "video_caption".

Final Output Format: Your entire response MUST be a single, valid JSON object following the structure of the examples, with keys "interacted_objects", "background_objects", and "sounds". Do not include any text outside of the JSON structure.

{input_marker}
{payload}
"""


def render_mcg_prompt(video_caption: str, image_caption: str, audio_caption: str, action_narration: str) -> str:
    for name, value in (("video_caption", video_caption), ("image_caption", image_caption),
                        ("audio_caption", audio_caption), ("action_narration", action_narration)):
        if not value or not value.strip():
            raise QAGenError(f"cannot render graph prompt: missing channel {name!r}")
    payload = _dumps({
        "video_caption": video_caption,
        "image_caption": image_caption,
        "audio_caption": audio_caption,
        "action_narration": action_narration,
    })
    return MCG_PROMPT_TEMPLATE.format(examples=_MCG_EXAMPLES, input_marker=INPUT_MARKER, payload=payload)


_FUSION_EXAMPLES = """\
Example 1: The person rinsed a plate under the running tap, the water splashing steadily, while a kettle and a dish rack sat on the counter nearby.
Example 2: The person swept the porch with a broom, the bristles scraping against the boards, past a flower pot standing by the railing.
Example 3: The person dug into the garden soil with a shovel as a dog barked at the fence, the turned earth crunching with each stroke.
Example 4: The person turned the pages of a book in an armchair beside a lamp and a bookshelf.
Example 5: The person rolled paint onto the wall with a squelching sound while traffic noise drifted in through the window near the ladder.\
"""

FUSION_PROMPT_TEMPLATE = """\
Objective: Your job is to generate a single, detailed, and objective paragraph summarizing what can be seen and heard in the video clip.

Input: You will be given:
- A free-form natural language paragraph summarizing what happens in the video.
- A list of short, possibly overlapping action tags extracted from the video. These may contain minor inconsistencies, but offer clues about human interactions and movements in the scene. Focus closely on the interactions starting with #C C.
- A multi-modal context graph represented as a structured JSON object containing: "interacted_objects" (objects the person interacted with), "background_objects" (objects present but not interacted with), and "sounds" (sound events grounded in the narration, with descriptions and causes).

Task: Write a single, coherent paragraph that summarizes the video scene in detail, following these rules.

Instructions:
- Clearly describe all key actions in the scene, combining the raw description and narration tags.
- Include all interacted objects, and describe how each was interacted with.
- Mention all background objects that are visible or relevant once, integrated naturally into the scene description. Do not repeat them again at the end.
- Integrate sound events by describing what caused them and when, grounded in the referenced actions. Not all actions have corresponding sounds. Only include sounds that are listed in the context graph. Use semantically appropriate or naturalistic descriptions for acoustic events.
- Use an objective and factual tone; avoid any emotional, subjective, or evaluative language.
- Write in past tense.
- Ensure the paragraph flows naturally and avoids redundancy.

Human Generated Examples: Here are 5 human created examples for the correct execution.
{examples}

Final Output Format: The final output must be in JSON format with key as "caption".

Here is the input to generate the caption:
{payload}
"""


def render_fusion_prompt(video_description: str, action_tags: str, graph: dict[str, Any]) -> str:
    payload = _dumps({
        "video_description": video_description,
        "action_tags": action_tags,
        "context_graph": graph,
    })
    return FUSION_PROMPT_TEMPLATE.format(examples=_FUSION_EXAMPLES, payload=payload)


_SSA_EXAMPLES = """\
Example 1
Input graph sounds: [{"acoustic_description": "water running", "source": "#C C rinses a plate"}]
Output: {"question": "What is the source of the water running sound heard in the video?", "answer": "There is one distinct grounded sound event in the clip. The water running sound was caused by the person rinsing a plate."}

Example 2
Input graph sounds: [{"acoustic_description": "bristles scraping", "source": "#C C sweeps the porch with a broom"}, {"acoustic_description": "dog barking", "source": "A dog barks at the fence"}]
Output: {"question": "What is the source of the bristles scraping sound heard in the video?", "answer": "There are two distinct grounded sound events in the clip. The bristles scraping sound was caused by the person sweeping the porch with a broom. The dog barking sound came from a dog barking at the fence."}

Example 3
Input graph sounds: [{"acoustic_description": "soil being turned", "source": "#C C digs the soil with a shovel"}]
Output: {"question": "What is the source of the soil being turned sound heard in the video?", "answer": "There is one distinct grounded sound event in the clip. The soil being turned sound was caused by the person digging the soil with a shovel."}

Example 4
Input graph sounds: [{"acoustic_description": "roller squelching", "source": "#C C rolls paint onto the wall"}, {"acoustic_description": "traffic noise", "source": ""}]
Output: {"question": "What is the source of the roller squelching sound heard in the video?", "answer": "There are two distinct grounded sound events in the clip. The roller squelching sound was caused by the person rolling paint onto the wall. The traffic noise was an ambient background sound."}

Example 5
Input graph sounds: [{"acoustic_description": "door creaking", "source": "#C C opens the shed door"}]
Output: {"question": "What is the source of the door creaking sound heard in the video?", "answer": "There is one distinct grounded sound event in the clip. The door creaking sound was caused by the person opening the shed door."}\
"""

SSA_PROMPT_TEMPLATE = """\
Objective: You are an AI assistant tasked with analyzing a video segment and performing three tasks:
- Generate a single open-ended question about the sound-source association observed in the video.
- Produce a natural, human-like narration that links sounds to the actions and objects responsible.
- Generate a detailed, structured answer to the question, grounded entirely in the provided context graph metadata.

Input: You will be provided with:
- video description: a description of the video segment.
- multi-modal context graph: interacted objects, background objects, and grounded sound events with their sources.

Instructions: Follow the instructions below to complete the task:
- Question Generation: If the "sounds" list is empty or missing, return this exact string as the only output: "{sentinel}" Otherwise, ask what the source of one of the grounded sounds is.
- When narrating egocentric data, a person is sometimes referred to by capital letters, such as "C". When writing the description, treat such IDs as referring to a person. For example, if a sound-producing evidence states "person C is clapping," it should be treated as "the person is clapping."
- Detailed Answer Generation:
  - Structure the answer as follows: Begin with a sentence that clearly states how many distinct grounded sound events were present. Then provide one sentence for each sound, explaining what caused it by using the acoustic description and grounding evidence. Treat C as the person in the video.
  - Do not speculate or add interpretation beyond the metadata.
  - Do not include any text outside of the JSON structure.
  - Do not include any step by step explanations.

Human Generated Examples: Here are 5 human created examples for the correct execution.
{examples}

Output Format: Output must be in a JSON format with following keys "question" and "answer".

Here is the input to generate the question-answer pair:
{payload}
"""


def render_ssa_prompt(video_description: str, graph: dict[str, Any]) -> str:
    payload = _dumps({"video_description": video_description, "context_graph": graph})
    return SSA_PROMPT_TEMPLATE.format(sentinel=EMPTY_SOUNDS_SENTINEL, examples=_SSA_EXAMPLES, payload=payload)


_AVH_FOCUS = {
    "sound": (
        "sound-related",
        "Focus on distinctive sounds such as foreground sounds related to human-object "
        "interaction such as hissing, tapping etc. or background sounds such as bird chirping etc.",
    ),
    "action": (
        "action-related",
        "Focus on distinctive, non-trivial actions such as wiping, twisting, or squeezing. "
        "Avoid trivial actions such as breathing, walking, or placing.",
    ),
    "object": (
        "object-related",
        "Focus on specific, manipulable objects. Avoid generic nouns like 'things', 'stuff', or 'material'.",
    ),
}

AVH_PROMPT_TEMPLATE = """\
Objective: Generate two {kind} question-answer pairs from an egocentric video caption that describes a person's visible actions, sounds, and objects. The output should be formatted as JSON with one correct and one hallucinated {category} question.

Input: You will be given an egocentric video narration containing descriptions of:
- The person's visible actions
- Distinctive sounds (e.g., hissing, tapping, scraping)
- Objects present in the scene
- Temporal information about when events occur

Instructions: Follow the instructions below:
- {focus}
- Generate one correct question: Ask about {article} {category} explicitly mentioned in the narration.
- Generate one hallucinated question: Ask about a plausible {category} that is not mentioned in the narration.
- Answer format: Answers must be in binary format "Yes" or "No".

Output Format: The output must be in JSON format with following keys: "question", "question type" including "Factual", "Hallucinated" and "answers".

Here is the input to generate the question-answer pair:
{payload}
"""


def render_avh_prompt(caption: str, category: str) -> str:
    if category not in _AVH_FOCUS:
        raise QAGenError(f"unknown hallucination category {category!r}")
    kind, focus = _AVH_FOCUS[category]
    article = "an" if category in ("action", "object") else "a"
    return AVH_PROMPT_TEMPLATE.format(
        kind=kind, category=category, focus=focus, article=article,
        payload=_dumps({"caption": caption}),
    )


TR_PAIR_PROMPT_TEMPLATE = """\
Objective: Generate two temporal reasoning question-answer pairs from a list of chronological video narrations, focusing on the order of Action, Object, and Sound events. The output should be formatted as a JSON list containing one "before" and one "after" question.

Input:
- A list of narrations describing what happens in the video in chronological order (caption_list).
- The specific question type to be generated (type: one of Action-Action, Action-Object, or Action-Sound).

Instructions: Follow the steps below:
1. Identify Distinct Events: Identify several unique, non-trivial, and non-repetitive events, each describing an Action, an Object, or a Sound.
2. Select Event Pair (E1, E2): Choose two events occurring at different times that match the required category. E1 must chronologically precede E2.
3. Generate Questions: Create one "before" question (referencing E2) and one "after" question (referencing E1) using the corresponding template:
   - Action-Action
     - Before: "What action was the person performing before <E2>?"
     - After: "What action did the person perform after <E1>?"
   - Action-Object
     - Before: "What objects can be seen before the person performed the <E2> action?"
     - After: "What objects can be seen after the person performed the <E1> action?"
   - Action-Sound
     - Before: "What sound can be heard before the person <E2>?"
     - After: "What sound can be heard after the person <E1>?"
4. Answer and options: Write a concise, naturalistic answer as if you watched the video. Include three plausible options that fit the context but are temporally incorrect.

Output Format: The output must be a JSON list of exactly two question objects (one "before" and one "after") with the following keys: "question", "answer", "type", and "options".

{input_marker}
{payload}
"""


def render_tr_pair_prompt(caption_list: Sequence[str], pair_type: str) -> str:
    if pair_type not in TR_PAIR_TYPES:
        raise QAGenError(f"unknown temporal pair type {pair_type!r}")
    payload = _dumps({"caption_list": list(caption_list), "type": pair_type})
    return TR_PAIR_PROMPT_TEMPLATE.format(input_marker=INPUT_MARKER, payload=payload)


TR_MCQ_PROMPT_TEMPLATE = """\
Objective: Generate one multiple-choice question about the temporal order of four events derived from a sequence of chronological egocentric video narrations.

Input: A sequence of detailed narrations in chronological order describing what happens in an egocentric video.

Instructions: Follow the steps below:
- Identify Four Grounded Events: Identify four unique, non-trivial events. Each event must include concise but meaningful details about the person's activity, the visible surroundings, and any sounds mentioned.
- Grounding Constraint: All events must be directly derived from the narrations. Do not hallucinate or invent any objects, sounds, or actions.
- Create Temporal Question: Create one general multiple-choice question that asks about the temporal order of the four events (e.g., "Which event happened first?", "Which moment occurred last?").
- Create Options: List the four events as options A, B, C, and D. Ensure the description for each option is the exact description provided in the events list.
- Provide Correct Answer: Indicate the correct temporal order by selecting one of the options (A, B, C, or D) as the answer.

Output Format: The output must be in JSON format with the following keys: "events" (a list of the four descriptions), "question", "options" (a map of A, B, C, D to the event descriptions), and "answer".

{input_marker}
{payload}
"""


def render_tr_ordering_prompt(caption_list: Sequence[str]) -> str:
    payload = _dumps({"caption_list": list(caption_list)})
    return TR_MCQ_PROMPT_TEMPLATE.format(input_marker=INPUT_MARKER, payload=payload)


_DENSE_EXAMPLES = """\
Example 1: Starting at 0 seconds, the person rinsed dishes at the sink with water running steadily; around 20 seconds they stacked plates on the rack with a soft clatter, and by 40 seconds they dried their hands while a kettle began to whistle.
Example 2: From 0 to 15 seconds the person swept the porch, the bristles scraping the boards; at 30 seconds a dog barked near the railing, and between 45 and 60 seconds the person emptied the dustpan into a bin with a dull thud.
Example 3: At 0 seconds the person rolled paint onto the wall with a wet squelch; traffic noise persisted in the background, and at 90 seconds they climbed the ladder to reach the upper wall, the frame creaking under each step.\
"""

DENSE_PROMPT_TEMPLATE = """\
Objective: Write a single, coherent, dense narration summarizing the entire video based on a list of 10-second captions.

Input: A list of narrations, each describing a 10-second segment of an egocentric video, including start_time, end_time, and the caption text.

Instructions: The final output must be a single, fluent paragraph that acts as a dense narration. The paragraph must adhere to the following rules:
- Integrate all actions, objects, and sounds across the full video.
- Use timestamps in seconds to indicate when key events occurred.
- Group similar or adjacent events into continuous spans.
- Avoid listing or repeating captions verbatim.
- Use only the information in the input captions.
- Be concise and fluent.
- Do not invent any new information or context.

Human Generated Examples: Here are 3 human created dense narrations.
{examples}

Output Format: A single paragraph, not a JSON object.

{input_marker}
{payload}
"""


def render_dense_prompt(entries: Sequence[dict[str, Any]]) -> str:
    payload = _dumps(list(entries))
    return DENSE_PROMPT_TEMPLATE.format(examples=_DENSE_EXAMPLES, input_marker=INPUT_MARKER, payload=payload)


JUDGE_PROMPT_TEMPLATE = """\
Objective: Act as an impartial grader to evaluate a PREDICTED_ANSWER against a GROUNDING_ANSWER with respect to a QUESTION.

Input:
- QUESTION: The question posed to the model.
- GROUNDING_ANSWER: The authoritative reference answer.
- PREDICTED_ANSWER: The model's answer to be graded.

Instructions for Grading:
1. Comparison: Compare PREDICTED_ANSWER to GROUNDING_ANSWER with respect to the QUESTION.
2. Assign Rating (1-5, integer only):
   - 5: Fully correct, complete, and faithful to the grounding; no meaningful errors or omissions.
   - 4: Mostly correct; minor omissions or small inaccuracies that do not change the overall correctness.
   - 3: Partially correct; captures some key points but misses important details or includes notable inaccuracies.
   - 2: Largely incorrect; substantial errors, contradictions, or missing major required points.
   - 1: Incorrect/irrelevant; contradicts the grounding or fails to answer the question.
3. Provide Reasoning: Briefly explain the rating (1-4 concise sentences).

Judging Rules (Priorities):
- Prioritize factual alignment with the GROUNDING_ANSWER. Contradictions result in heavy penalization.
- Extra details are acceptable only if they do not conflict with the grounding and remain relevant to the QUESTION.
- Penalize hallucinations, unverifiable claims, safety issues, and failure to address the core of the QUESTION.
- Do not reward verbosity or style unless it improves factual accuracy or completeness with respect to the grounding.
- If the grounding indicates the question is unanswerable, judge whether the prediction correctly reflects that.

Output Format: The output MUST be valid JSON (no markdown, no extra text) with the following keys:
{{
  "rating": <int value between 1 to 5>,
  "reason": "<string of 1-2 lines explaining the rating>"
}}

{input_marker}
{payload}
"""


def render_judge_prompt(question: str, grounding_answer: str, predicted_answer: str) -> str:
    payload = _dumps({
        "QUESTION": question,
        "GROUNDING_ANSWER": grounding_answer,
        "PREDICTED_ANSWER": predicted_answer,
    })
    return JUDGE_PROMPT_TEMPLATE.format(input_marker=INPUT_MARKER, payload=payload)


def extract_prompt_input(prompt: str) -> Any:
    """Recover the JSON payload a renderer embedded after the input marker.

    The deterministic mock backend uses this to script content-aware
    responses from nothing but the request text.
    """
    markers = (INPUT_MARKER, "Here is the input to generate the caption:",
               "Here is the input to generate the question-answer pair:")
    position = -1
    for marker in markers:
        position = prompt.rfind(marker)
        if position >= 0:
            position += len(marker)
            break
    if position < 0:
        raise QAGenError("prompt carries no embedded input payload")
    from .schemas import extract_json_value

    return extract_json_value(prompt[position:])
