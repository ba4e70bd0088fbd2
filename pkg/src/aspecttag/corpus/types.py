from __future__ import annotations

from dataclasses import dataclass

POLARITIES = ("positive", "negative", "neutral", "conflict", "none")

_POLARITY_ALIASES = {
    "positive": "positive", "pos": "positive", "+": "positive",
    "negative": "negative", "neg": "negative", "-": "negative", "−": "negative",
    "neutral": "neutral", "neu": "neutral", "0": "neutral",
    "conflict": "conflict",
    "none": "none", "": "none",
}


class CorpusError(ValueError):
    """Raised for malformed or misaligned corpus input."""


class AlignmentWarning(UserWarning):
    pass


def normalize_polarity(value):
    key = (value or "").strip().lower()
    try:
        return _POLARITY_ALIASES[key]
    except KeyError:
        raise CorpusError(f"unknown polarity {value!r}") from None


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int
    pos: str | None = None
    chunk: str | None = None
    pred_iob: str | None = None

    def __post_init__(self):
        if not self.start < self.end:
            raise CorpusError(f"token {self.surface!r} has empty offsets [{self.start}, {self.end})")


@dataclass(frozen=True)
class AspectSpan:
    start: int
    end: int
    term: str
    polarity: str = "none"


@dataclass(frozen=True)
class Sentence:
    text: str
    tokens: tuple[Token, ...] = ()
    spans: tuple[AspectSpan, ...] = ()
    source_id: str = ""
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "spans", tuple(self.spans))
        last_end = -1
        for span in sorted(self.spans, key=lambda s: s.start):
            if span.start < 0 or span.end > len(self.text) or span.start >= span.end:
                raise CorpusError(
                    f"{self.source_id}: span [{span.start}, {span.end}) outside text of length {len(self.text)}")
            if span.start < last_end:
                raise CorpusError(f"{self.source_id}: overlapping spans at offset {span.start}")
            last_end = span.end
        prev = -1
        for tok in self.tokens:
            if tok.start < prev:
                raise CorpusError(f"{self.source_id}: tokens overlap or are out of order at {tok.start}")
            prev = tok.end

    @property
    def words(self):
        return [t.surface for t in self.tokens]
