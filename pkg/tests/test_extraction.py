"""Answer extraction cascades against hand-labeled response fixtures.

Every fixture below was labeled by reading the response text; the cascades
must agree with all of them, and must never raise on arbitrary input.
"""

from __future__ import annotations

import random
import string

from egoavu.extraction import EXTRACTOR_VERSION, extract_binary, extract_choice

# (response, expected label or None) - explicit phrases, leading letters,
# standalone last-resort mentions, and genuinely ambiguous/absent cases.
CHOICE_FIXTURES = [
    ("The answer is (B).", "B"),
    ("Answer: C", "C"),
    ("The final answer is D", "D"),
    ("I think the correct option is A because the hammer came first.", "A"),
    ("answer: d", "D"),
    ("The person sliced the bread. So the answer is A.", "A"),
    ("Answer: (D) the whistling kettle", "D"),
    ("The right answer is b", "B"),
    ("After reviewing the order of events, the answer is C, not D.", "C"),
    ("The answer is:\nB", "B"),
    ("Final answer: A", "A"),
    ('My answer is "C".', "C"),
    ("The correct answer is (a) since the tap ran first.", "A"),
    ("The answer is B. Option D happened much later.", "B"),
    ("The best option is D", "D"),
    ("A. The person opened the door", "A"),
    ("B", "B"),
    ("(D) The kettle whistled", "D"),
    ("b) the person waved", "B"),
    ("C. Drilling a hole", "C"),
    ("d", "D"),
    ('"B" is correct.', "B"),
    ("**A.** The tap was turned.", "A"),
    ("C", "C"),
    ("A: The person lifted the pan first.", "A"),
    ("D Drilling came last", "D"),
    ("B, because the sweeping happened earlier.", "B"),
    ("[C] the sponge", "C"),
    ("c: cutting the onion", "C"),
    ("(B)", "B"),
    ("Option C: the door closed.", "C"),
    ("After watching, D is the best choice.", "D"),
    ("It must be (A), since the tap ran before.", "A"),
    ("The sequence suggests option B.", "B"),
    ("The correct answer is option C.", "C"),
    ("The events order makes it A.", "A"),
    ("Clearly D, the rinse came last.", "D"),
    ("Answer – B", "B"),
    ("I would select B here.", "B"),
    ("The third option, C, matches the order.", "C"),
    ("Most likely it is D.", "D"),
    ("Given the audio cue, A fits best.", "A"),
    ("Both A and C seem plausible", None),
    ("Neither A nor B happened.", None),
    ("Maybe B? Or C?", None),
    ("I cannot determine the order from the clip.", None),
    ("The person rinsed the cup before opening the door.", None),
    ("It could be A, B, or C depending on the segment.", None),
    ("", None),
    ("The options all describe sounds, but none occurred.", None),
]

BINARY_FIXTURES = [
    ("Yes, there is a beeping sound.", "yes"),
    ("No such sound occurs.", "no"),
    ("yes", "yes"),
    ("No.", "no"),
    ("NO, the microwave never beeps.", "no"),
    ("Yes — the door slams at the end.", "yes"),
    ("Yes.", "yes"),
    ("no, nothing like that is audible.", "no"),
    ("Yes! The kettle whistles twice.", "yes"),
    ("No - the person never touches the drill.", "no"),
    ("Yes, the person is wiping the counter.", "yes"),
    ("no.", "no"),
    ("Yes and no", None),
    ("Yes and no, it depends on the segment.", None),
    ("The answer is yes.", "yes"),
    ("Answer: No", "no"),
    ("The answer is no, there is no hissing.", "no"),
    ("My final answer is Yes.", "yes"),
    ("answer: yes", "yes"),
    ("The short answer is no.", "no"),
    ("The answer is clearly no.", "no"),
    ("There is no beeping in this clip.", "no"),
    ("A hissing can be heard around 20 seconds.", "yes"),
    ("The video does not contain such a sound.", "no"),
    ("I believe there is a faint tapping.", "yes"),
    ("The sound is not present in the video.", "no"),
    ("There is a dog barking near the fence.", "yes"),
    ("Such a squeak never occurs in the clip.", "no"),
    ("The scraping is audible at the start.", "yes"),
    ("That action did not happen.", "no"),
    ("The spatula can be seen on the rack.", "yes"),
    ("There are no animals in this video.", "no"),
    ("You can hear water splashing.", "yes"),
    ("The person does not interact with the kettle.", "no"),
    ("A truck is visible through the window.", "yes"),
    ("The tapping is heard twice.", "yes"),
    ("No beeping sound exists, the microwave is silent.", "no"),
    ("There is an audible click when the lid closes.", "yes"),
    ("It never happens.", "no"),
    ("The clip contains no such moment.", "no"),
    ("It depends on which segment you mean.", None),
    ("", None),
    ("The person is in the kitchen.", None),
    ("Possibly, though the audio is unclear.", None),
    ("There is a hum, but there is no beeping.", None),
    ("Hard to say from this angle.", None),
    ("no -- the drill never spins.", "no"),
    ("YES, the sweeping is audible.", "yes"),
    ("The claimed sound cannot be heard anywhere.", "no"),
    ("Indeed, you can hear the pages turning.", "yes"),
]


def test_fixture_sets_have_fifty_entries_each():
    assert len(CHOICE_FIXTURES) == 50
    assert len(BINARY_FIXTURES) == 50


def test_choice_agrees_with_every_hand_label():
    failures = [(text, expected, extract_choice(text))
                for text, expected in CHOICE_FIXTURES
                if extract_choice(text) != expected]
    assert not failures, failures


def test_binary_agrees_with_every_hand_label():
    failures = [(text, expected, extract_binary(text))
                for text, expected in BINARY_FIXTURES
                if extract_binary(text) != expected]
    assert not failures, failures


def test_explicit_answer_example():
    assert extract_choice("The answer is (B).") == "B"


def test_ambiguous_pair_yields_none():
    assert extract_choice("Both A and C seem plausible") is None


def test_binary_conflict_yields_none():
    assert extract_binary("Yes and no") is None


def _fuzz_corpus(n: int, seed: int = 99) -> list[str]:
    rng = random.Random(seed)
    alphabet = string.printable + "答えはいいえ🎬🔊"
    shards = [text for text, _ in CHOICE_FIXTURES + BINARY_FIXTURES]
    corpus = []
    for _ in range(n):
        kind = rng.random()
        if kind < 0.4:
            corpus.append("".join(rng.choice(alphabet) for _ in range(rng.randint(0, 80))))
        elif kind < 0.7:
            corpus.append(" ".join(rng.choice(shards) for _ in range(rng.randint(1, 3))))
        else:
            base = rng.choice(shards)
            cut = rng.randint(0, len(base)) if base else 0
            corpus.append(base[:cut] + "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20))))
    return corpus


def test_extractors_are_total_on_fuzz_corpus():
    for text in _fuzz_corpus(2000):
        choice = extract_choice(text)
        binary = extract_binary(text)
        assert choice in (None, "A", "B", "C", "D")
        assert binary in (None, "yes", "no")


def test_version_tag_present():
    assert EXTRACTOR_VERSION == "extractor/1"
