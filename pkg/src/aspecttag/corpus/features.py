"""Binary linguistic features from POS and chunk IOB tags.

Default layout (14 bits):

====  =============================================================
0-7   POS class: noun, verb, adjective, adverb, pronoun, determiner,
      preposition, other
8-10  chunk position: B, I, O
11-13 chunk type: NP, VP, other (no type bit for chunk O)
====  =============================================================

The POS classes are matched by tag prefix in order and can be replaced by a
JSON feature table (see :meth:`FeatureTable.from_json`).
"""

from __future__ import annotations

import json
import warnings

import numpy as np

DEFAULT_POS_CLASSES = (
    ("noun", ("NN",)),
    ("verb", ("VB", "MD")),
    ("adjective", ("JJ",)),
    ("adverb", ("RB", "WRB")),
    ("pronoun", ("PRP", "WP")),
    ("determiner", ("DT", "PDT", "WDT")),
    ("preposition", ("IN", "TO")),
)
DEFAULT_CHUNK_TYPES = ("NP", "VP")
PRED_TAGS = ("O", "B", "I")


class FeatureWarning(UserWarning):
    pass


class FeatureTable:
    def __init__(self, pos_classes=DEFAULT_POS_CLASSES, chunk_types=DEFAULT_CHUNK_TYPES):
        self.pos_classes = tuple((name, tuple(prefixes)) for name, prefixes in pos_classes)
        self.chunk_types = tuple(chunk_types)

    @classmethod
    def from_json(cls, data):
        table = json.loads(data)
        return cls(table["pos_classes"], table["chunk_types"])

    @property
    def size(self):
        # POS classes + "other", B/I/O, chunk types + "other"
        return len(self.pos_classes) + 1 + 3 + len(self.chunk_types) + 1

    def pos_index(self, pos):
        for i, (_, prefixes) in enumerate(self.pos_classes):
            if any(pos.startswith(p) for p in prefixes):
                return i
        return len(self.pos_classes)


DEFAULT_TABLE = FeatureTable()
N_FEATURES = DEFAULT_TABLE.size


def linguistic_features(token, table=DEFAULT_TABLE):
    bits = np.zeros(table.size, dtype=np.int8)
    if not token.pos or not token.chunk:
        warnings.warn(f"token {token.surface!r} lacks POS/chunk annotation; features left at zero",
                      FeatureWarning, stacklevel=2)
        return bits
    bits[table.pos_index(token.pos)] = 1
    base = len(table.pos_classes) + 1
    prefix, _, ctype = token.chunk.partition("-")
    position = {"B": 0, "I": 1}.get(prefix, 2)
    bits[base + position] = 1
    if position != 2:
        base += 3
        if ctype in table.chunk_types:
            bits[base + table.chunk_types.index(ctype)] = 1
        else:
            bits[base + len(table.chunk_types)] = 1
    return bits


def pred_bits(tag):
    """One-hot over (O, B, I) for a source model's predicted IOB tag."""
    bits = np.zeros(len(PRED_TAGS), dtype=np.int8)
    bits[PRED_TAGS.index((tag or "O")[0])] = 1
    return bits


def sentence_features(sentence, use_pred=False, table=DEFAULT_TABLE):
    """(n, F) float matrix of per-token feature bits."""
    rows = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FeatureWarning)
        for tok in sentence.tokens:
            row = linguistic_features(tok, table)
            if use_pred:
                row = np.concatenate([row, pred_bits(tok.pred_iob)])
            rows.append(row)
    if caught:
        warnings.warn(f"{sentence.source_id}: {len(caught)} token(s) without POS/chunk annotation",
                      FeatureWarning, stacklevel=2)
    width = table.size + (len(PRED_TAGS) if use_pred else 0)
    return np.array(rows, dtype=np.float64).reshape(len(rows), width)
