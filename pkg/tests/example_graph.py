"""Reference context-graph fixture: a hand-washing clip.

The raw JSON keeps the sloppy trailing commas models tend to emit; the
companion narrations carry every evidence string the graph cites, so the
graph validates clean against them.
"""

from __future__ import annotations

from egoavu.enrichment import EnhancedNarrations

EXAMPLE_GRAPH_RAW = """\
{
        "interacted_objects": [
            ["sink", "#C C rinses both hands"],
            ["tap", "#C C turns on tap"],
            ["door", "#C C opens the door"],
        ],
        "background_objects": [
            "oranges",
            "sponge",
            "red chair",
            "microwave",
            "cabinets"
        ],
        "sounds": [
            {
                "acoustic_description": "water flowing sound",
                "source": "#C C turns on tap",
                "evidence_source": "action_narration",
                "sound_category": "Foreground Sound"
            },
            {
                "acoustic_description": "hands being rinsed sound",
                "source": "#C C rinses both hands",
                "evidence_source": "action_narration",
                "sound_category": "Foreground Sound"
            },
            {
                "acoustic_description": "door opening and closing sound",
                "source": "#C C opens the door",
                "evidence_source": "action_narration",
                "sound_category": "Foreground Sound"
            }
        ]
    }
"""


def example_enhanced(clip_id: str = "demo:0000") -> EnhancedNarrations:
    return EnhancedNarrations(
        clip_id=clip_id,
        image_caption="oranges, sponge, red chair, microwave, cabinets, sink, tap, door",
        video_caption=(
            "A person stands at a kitchen sink, turns on the tap, rinses both hands, "
            "and then opens the door to leave the room."
        ),
        audio_caption="water flowing sound, hands being rinsed sound, door opening and closing sound",
        action_narration="[2.0s] #C C turns on tap\n[5.5s] #C C rinses both hands\n[9.0s] #C C opens the door",
    )
