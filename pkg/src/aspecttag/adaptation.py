"""Source-to-target domain adaptation: WEIGHTED and PRED.

WEIGHTED trains on the union of both corpora with every source sentence
flagged by a weight ``w``; the network multiplies that sentence's looked-up
embedding vectors by ``w`` before building context windows, so source and
target share one embedding table.

PRED runs a source-trained AE tagger over the target corpus and stores its
predicted IOB tag per token (``pred_iob``). With ``pred_features`` on, those
tags become three extra one-hot bits after the 14 linguistic ones.
"""

from __future__ import annotations

from dataclasses import replace

from .numkernel import ConfigError
from .training import Fold, kfold_split

DEFAULT_WEIGHT = 0.2


def weighted_union(src, tgt, w=DEFAULT_WEIGHT, src_scheme=None, tgt_scheme=None):
    if not 0.0 < w <= 1.0:
        raise ConfigError(f"WEIGHTED needs 0 < w <= 1, got {w}")
    if src_scheme is not None and tgt_scheme is not None and src_scheme != tgt_scheme:
        raise ConfigError(f"source scheme {src_scheme} differs from target scheme {tgt_scheme}")
    return [replace(s, weight=w) for s in src] + list(tgt)


def weighted_folds(src, tgt, k=10, w=DEFAULT_WEIGHT, val_fraction=0.1, seed=0):
    """Cross-validation over the target corpus with all source sentences
    (weighted) appended to each fold's training part."""
    flagged = [replace(s, weight=w) for s in src]
    return [Fold(fold.train + flagged, fold.validation, fold.test)
            for fold in kfold_split(tgt, k, val_fraction, seed)]


def pred_augment(src_model, tgt):
    """Target sentences with the source model's IOB predictions attached."""
    if src_model.config.scheme_mode != "AE":
        raise ConfigError("PRED needs a source model trained in AE mode")
    out = []
    for s in tgt:
        labels = src_model.predict_labels(src_model.encode(s, with_labels=False))
        tokens = tuple(replace(t, pred_iob=lab.split("-")[0]) for t, lab in zip(s.tokens, labels))
        out.append(replace(s, tokens=tokens))
    return out
