"""Regenerate src/aspecttag/data/synthetic.jsonl (the bundled overfit corpus).

Aspect terms follow "the" and carry polarity cued by a fixed adjective.
"""

from dataclasses import replace
from pathlib import Path

from aspecttag.corpus import AspectSpan, Sentence, dumps_canonical, tokenize

SENTENCES = [
    ("The battery is great .", [("battery", "positive")]),
    ("The screen is awful .", [("screen", "negative")]),
    ("The camera is okay .", [("camera", "neutral")]),
    ("I love the battery life and the camera .", [("battery life", "positive"), ("camera", "positive")]),
    ("I hate the sound quality .", [("sound quality", "negative")]),
    ("The price is okay .", [("price", "neutral")]),
    ("We watched the video today .", []),
    ("The design is great .", [("design", "positive")]),
    ("I hate the screen and love the design .", [("screen", "negative"), ("design", "positive")]),
    ("The battery life is awful .", [("battery life", "negative")]),
    ("It arrived yesterday .", []),
    ("The sound quality is great .", [("sound quality", "positive")]),
    ("I love the price .", [("price", "positive")]),
    ("The camera is awful .", [("camera", "negative")]),
    ("The screen is okay .", [("screen", "neutral")]),
    ("Thanks for watching .", []),
    ("I hate the price .", [("price", "negative")]),
    ("The design is okay .", [("design", "neutral")]),
    ("I love the screen .", [("screen", "positive")]),
    ("The battery is awful .", [("battery", "negative")]),
]

POS = {
    "The": "DT", "the": "DT", "is": "VBZ", "I": "PRP", "We": "PRP", "It": "PRP", "love": "VBP",
    "hate": "VBP", "and": "CC", ".": ".", "great": "JJ", "awful": "JJ", "okay": "JJ", "watched": "VBD",
    "video": "NN", "today": "NN", "arrived": "VBD", "yesterday": "NN", "Thanks": "NNS", "for": "IN",
    "watching": "VBG",
}


def chunk_tags(pos):
    tags, prev = [], None
    for p in pos:
        kind = "NP" if p[:2] in ("DT", "NN", "PR") else "VP" if p.startswith("VB") else None
        if kind is None:
            tags.append("O")
        else:
            tags.append(("I-" if prev == kind else "B-") + kind)
        prev = kind
    return tags


def build():
    out = []
    for k, (text, aspects) in enumerate(SENTENCES):
        spans, cursor = [], 0
        for term, pol in aspects:
            start = text.index(" " + term + " ", cursor) + 1
            spans.append(AspectSpan(start, start + len(term), term, pol))
            cursor = start + len(term)
        toks = tokenize(text)
        pos = [POS.get(t.surface, "NN") for t in toks]
        toks = [replace(t, pos=p, chunk=c) for t, p, c in zip(toks, pos, chunk_tags(pos))]
        out.append(Sentence(text, toks, spans, f"synthetic-{k:02d}"))
    return out


if __name__ == "__main__":
    path = Path(__file__).resolve().parents[1] / "src/aspecttag/data/synthetic.jsonl"
    path.write_text(dumps_canonical(build()), encoding="utf-8")
    print(f"wrote {path}")
