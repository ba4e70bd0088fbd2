"""Phrase-level scoring with conlleval semantics, sentiment decoupling and
Welch t-tests over cross-validation folds."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import stdtr

from .corpus.tags import chunks, sentiment_disagreements, spans_to_labels

CLASSES = ("+", "-", "0")


class EvaluationError(ValueError):
    pass


def pct(x):
    """Round a percentage the way conlleval prints it (``%.2f``)."""
    return float(f"{x:.2f}")


@dataclass
class ConllScore:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int


def prf(correct, found_pred, found_gold):
    precision = 100.0 * correct / found_pred if found_pred else 0.0
    recall = 100.0 * correct / found_gold if found_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def conlleval_f1(gold, predicted):
    """Micro-averaged phrase P/R/F1 (percentages, 2 decimals) over sentences.

    ``gold`` and ``predicted`` are lists of per-sentence label sequences. A
    predicted phrase counts only if its boundaries and type match a gold phrase.
    """
    if len(gold) != len(predicted):
        raise EvaluationError(f"{len(gold)} gold sentences vs {len(predicted)} predicted")
    n_gold = n_pred = n_correct = 0
    for k, (g, p) in enumerate(zip(gold, predicted)):
        if len(g) != len(p):
            raise EvaluationError(f"sentence {k}: {len(g)} gold labels vs {len(p)} predicted")
        gc, pc = set(chunks(g)), set(chunks(p))
        n_gold += len(gc)
        n_pred += len(pc)
        n_correct += len(gc & pc)
    precision, recall, f1 = prf(n_correct, n_pred, n_gold)
    return ConllScore(pct(precision), pct(recall), pct(f1), n_gold, n_pred, n_correct)


def decouple(labels):
    """Split collapsed sentiment tags into AE tags plus per-span polarities.

    Segmentation follows conlleval: an I tag whose sentiment differs from the
    running phrase opens a new phrase (and is counted as a disagreement).
    Returns ``(ae_labels, [(first, last_exclusive, suffix)], disagreements)``.
    """
    spans = [(a, b, kind[3:] if kind.startswith("ASP") else kind) for a, b, kind in chunks(labels)]
    ae = spans_to_labels(len(labels), spans, mode="AE")
    return ae, spans, sentiment_disagreements(labels)


def sentiment_class_f1(gold_spans, pred_spans):
    """Per-class P/R/F1 for polarity classes over exactly matching spans.

    Both arguments are per-sentence lists of ``(first, last, suffix)``.
    """
    tp = dict.fromkeys(CLASSES, 0)
    n_gold = dict.fromkeys(CLASSES, 0)
    n_pred = dict.fromkeys(CLASSES, 0)
    for g, p in zip(gold_spans, pred_spans):
        gold_pol = {(a, b): c for a, b, c in g}
        for a, b, c in g:
            n_gold[c] += 1
        for a, b, c in p:
            n_pred[c] += 1
            if gold_pol.get((a, b)) == c:
                tp[c] += 1
    out = {}
    for c in CLASSES:
        precision, recall, f1 = prf(tp[c], n_pred[c], n_gold[c])
        out[c] = {"precision": pct(precision), "recall": pct(recall), "f1": pct(f1),
                  "gold": n_gold[c], "predicted": n_pred[c], "correct": tp[c]}
    return out


@dataclass
class EvalReport:
    mode: str
    single: ConllScore
    joint: ConllScore
    per_class: dict = field(default_factory=dict)
    disagreements: int = 0

    @property
    def single_f1(self):
        return self.single.f1

    @property
    def joint_f1(self):
        return self.joint.f1

    @property
    def f1(self):
        """The score models are selected on: joint for AESC, plain for AE."""
        return self.joint.f1

    def to_dict(self):
        d = asdict(self)
        d["single_f1"] = self.single_f1
        d["joint_f1"] = self.joint_f1
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self):
        if self.mode == "AE":
            s = self.single
            return (f"{'precision':>10} {'recall':>8} {'F1':>8}\n"
                    f"{s.precision:>10.2f} {s.recall:>8.2f} {s.f1:>8.2f}")
        head = f"{'Tagging F1':^17}|{'Classification F1':^26}\n"
        head += f"{'single':>8} {'joint':>8}|{'+':>8} {'-':>8} {'0':>8}\n"
        row = f"{self.single_f1:>8.2f} {self.joint_f1:>8.2f}|"
        row += " ".join(f"{self.per_class[c]['f1']:>8.2f}" for c in CLASSES)
        return head + row


def evaluate(gold, predicted, mode):
    """Full report for per-sentence label sequences of one scheme."""
    mode = mode.upper()
    joint = conlleval_f1(gold, predicted)
    if mode == "AE":
        return EvalReport("AE", joint, joint)
    gd = [decouple(g) for g in gold]
    pd = [decouple(p) for p in predicted]
    single = conlleval_f1([d[0] for d in gd], [d[0] for d in pd])
    per_class = sentiment_class_f1([d[1] for d in gd], [d[1] for d in pd])
    return EvalReport("AESC", single, joint, per_class, sum(d[2] for d in pd))


def evaluate_model(model, examples):
    gold, pred = [], []
    for ex in examples:
        gold.append([model.scheme.label(i) for i in ex.labels])
        pred.append(model.predict_labels(ex))
    return evaluate(gold, pred, model.config.scheme_mode)


def conll_lines(tokens, gold, predicted):
    """Token-per-line ``token<TAB>gold<TAB>predicted`` block for one sentence."""
    return [f"{t}\t{g}\t{p}" for t, g, p in zip(tokens, gold, predicted)]


# significance

@dataclass
class SignificanceResult:
    t: float
    df: float
    p: float
    degenerate: bool = False


def ttest_two_sided(a, b):
    """Welch's unequal-variance t-test, two-sided.

    If both samples have zero variance the statistic is undefined; p is then
    1.0 for equal means and 0.0 otherwise, and ``degenerate`` is set.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    diff = a.mean() - b.mean()
    se2 = va + vb
    if se2 == 0.0:
        if diff == 0.0:
            return SignificanceResult(0.0, float(a.size + b.size - 2), 1.0, True)
        return SignificanceResult(math.copysign(math.inf, diff), float(a.size + b.size - 2), 0.0, True)
    t = diff / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (a.size - 1) + vb ** 2 / (b.size - 1))
    p = float(min(1.0, 2.0 * stdtr(df, -abs(t))))
    return SignificanceResult(float(t), float(df), p)
