"""IOB tag schemes for aspect extraction (AE) and collapsed sentiment tags (AESC)."""

from __future__ import annotations

import warnings

from .types import AlignmentWarning, AspectSpan, CorpusError

SUFFIX = {"positive": "+", "negative": "-", "neutral": "0", "conflict": "0", "none": "0"}
POLARITY_OF_SUFFIX = {"+": "positive", "-": "negative", "0": "neutral"}

AE_LABELS = ("O", "B-ASP", "I-ASP")
AESC_LABELS = ("O", "B-ASP+", "I-ASP+", "B-ASP-", "I-ASP-", "B-ASP0", "I-ASP0")


class TagScheme:
    """Ordered label vocabulary with a stable label <-> id bijection."""

    def __init__(self, mode, labels=None):
        mode = mode.upper()
        if mode not in ("AE", "AESC"):
            raise ValueError(f"unknown scheme mode {mode!r}")
        canonical = AE_LABELS if mode == "AE" else AESC_LABELS
        labels = tuple(labels) if labels is not None else canonical
        if sorted(labels) != sorted(canonical):
            raise ValueError(f"{mode} labels must be a permutation of {canonical}")
        self.mode = mode
        self.labels = labels
        self._ids = {lab: i for i, lab in enumerate(labels)}

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return isinstance(other, TagScheme) and self.mode == other.mode and self.labels == other.labels

    def __repr__(self):
        return f"TagScheme({self.mode!r})"

    def id(self, label):
        return self._ids[label]

    def label(self, idx):
        return self.labels[idx]

    @property
    def outside(self):
        return self._ids["O"]

    def span_labels(self, polarity):
        suffix = SUFFIX[polarity] if self.mode == "AESC" else ""
        return f"B-ASP{suffix}", f"I-ASP{suffix}"


def split_label(label):
    """``'B-ASP+'`` -> ``('B', 'ASP+')``; ``'O'`` -> ``('O', '')`` (conlleval split)."""
    prefix, sep, kind = label.partition("-")
    return (prefix, kind) if sep else (label, "")


def strip_sentiment(label):
    return label.rstrip("+-0") if label != "O" else label


def chunks(labels):
    """Phrase spans ``(first, last_exclusive, type)`` under conlleval's IOB rules.

    An I after O, or after a phrase of a different type, opens a new phrase.
    """
    out = []
    start, cur_type = None, None
    for i, lab in enumerate(labels):
        prefix, kind = split_label(lab)
        if prefix not in ("B", "I", "O"):
            raise ValueError(f"unsupported tag {lab!r}")
        if start is not None and (prefix in ("B", "O") or kind != cur_type):
            out.append((start, i, cur_type))
            start = None
        if prefix == "B" or (prefix == "I" and start is None):
            start, cur_type = i, kind
    if start is not None:
        out.append((start, len(labels), cur_type))
    return out


def snap_span(span, tokens):
    """Token index range covering ``span``; widened outward over partial tokens."""
    covered = [i for i, t in enumerate(tokens) if t.start < span.end and t.end > span.start]
    if not covered:
        raise CorpusError(f"span {span.term!r} [{span.start}, {span.end}) covers no token")
    first, last = covered[0], covered[-1] + 1
    if tokens[first].start != span.start or tokens[last - 1].end != span.end:
        warnings.warn(
            f"span {span.term!r} [{span.start}, {span.end}) snapped to token boundaries "
            f"[{tokens[first].start}, {tokens[last - 1].end})", AlignmentWarning, stacklevel=3)
    return first, last


def encode_labels(sentence, scheme):
    labels = ["O"] * len(sentence.tokens)
    for span in sentence.spans:
        first, last = snap_span(span, sentence.tokens)
        if any(lab != "O" for lab in labels[first:last]):
            warnings.warn(f"{sentence.source_id}: span {span.term!r} overlaps another after snapping",
                          AlignmentWarning, stacklevel=2)
        b, inside = scheme.span_labels(span.polarity)
        labels[first] = b
        for i in range(first + 1, last):
            labels[i] = inside
    return labels


def encode_tags(sentence, scheme):
    return [scheme.id(lab) for lab in encode_labels(sentence, scheme)]


def _span_text(tokens, first, last, text):
    start, end = tokens[first].start, tokens[last - 1].end
    if text is not None:
        return text[start:end]
    parts = [tokens[first].surface]
    for prev, tok in zip(tokens[first:last - 1], tokens[first + 1:last]):
        parts.append(" " * (tok.start - prev.end) + tok.surface)
    return "".join(parts)


def decode_labels(labels, tokens, text=None):
    """String labels -> aspect spans. AESC polarity comes from the phrase type."""
    if len(labels) != len(tokens):
        raise ValueError(f"{len(labels)} labels for {len(tokens)} tokens")
    spans = []
    for first, last, kind in chunks(labels):
        suffix = kind[3:] if kind.startswith("ASP") else ""
        polarity = POLARITY_OF_SUFFIX.get(suffix, "none")
        spans.append(AspectSpan(tokens[first].start, tokens[last - 1].end,
                                _span_text(tokens, first, last, text), polarity))
    return spans


def decode_tags(label_ids, tokens, scheme, text=None):
    return decode_labels([scheme.label(i) for i in label_ids], tokens, text)


def sentiment_disagreements(labels):
    """Number of I tags whose sentiment differs from the preceding aspect tag."""
    count = 0
    for prev, cur in zip(labels, labels[1:]):
        p_prefix, p_kind = split_label(prev)
        c_prefix, c_kind = split_label(cur)
        if c_prefix == "I" and p_prefix in ("B", "I") and p_kind != c_kind:
            count += 1
    return count


def spans_to_labels(n, token_ranges, mode="AE"):
    labels = ["O"] * n
    for first, last, kind in token_ranges:
        tag = "ASP" if mode == "AE" else kind
        labels[first] = f"B-{tag}"
        for i in range(first + 1, last):
            labels[i] = f"I-{tag}"
    return labels
