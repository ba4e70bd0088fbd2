"""Mini-batch SGD with per-epoch exponential decay and F1 early stopping."""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .evaluation import evaluate_model
from .models import Example
from .numkernel import ConfigError, Tape

log = logging.getLogger(__name__)


class TruncationWarning(UserWarning):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    decay_ratio: float = 0.9
    batch_size: int = 1
    max_len: int = 200
    max_epochs: int = 5
    patience_steps: int | None = None
    eval_every: int | None = None
    clip_norm: float | None = 5.0
    shuffle: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1 or self.max_len < 1 or self.max_epochs < 1:
            raise ConfigError("learning_rate, batch_size, max_len and max_epochs must be positive")
        if not 0 < self.decay_ratio <= 1:
            raise ConfigError(f"decay_ratio must be in (0, 1], got {self.decay_ratio}")

    @classmethod
    def for_architecture(cls, architecture, **overrides):
        """Defaults: ARNN uses batches of 16 with step-based validation and a
        1000-step patience; baselines train per sentence for 5 epochs."""
        if architecture.upper() == "ARNN":
            base = dict(batch_size=16, max_epochs=50, patience_steps=1000, eval_every=100)
        else:
            base = dict(batch_size=1, max_epochs=5)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def lr_at(self, epoch):
        return self.learning_rate * self.decay_ratio ** epoch


@dataclass
class Batch:
    ids: np.ndarray
    labels: np.ndarray
    mask: np.ndarray
    features: np.ndarray | None
    weights: np.ndarray
    truncated: int = 0

    def __len__(self):
        return self.ids.shape[0]

    def examples(self):
        """Unpadded per-sentence views."""
        out = []
        for r, n in enumerate(self.mask.sum(axis=1)):
            feats = self.features[r, :n] if self.features is not None else None
            out.append(Example(self.ids[r, :n], self.labels[r, :n], feats, float(self.weights[r])))
        return out


def make_batches(examples, batch_size, max_len=200):
    """Consecutive groups of ``batch_size`` examples, padded to the group max
    length and capped at ``max_len`` tokens (longer ones are truncated)."""
    batches = []
    for start in range(0, len(examples), batch_size):
        group = examples[start:start + batch_size]
        lengths = [min(len(ex), max_len) for ex in group]
        truncated = sum(1 for ex in group if len(ex) > max_len)
        if truncated:
            warnings.warn(f"{truncated} sentence(s) truncated to {max_len} tokens", TruncationWarning, stacklevel=2)
        T = max(lengths) if lengths else 0
        ids = np.zeros((len(group), T), dtype=np.int64)
        labels = np.zeros((len(group), T), dtype=np.int64)
        mask = np.zeros((len(group), T), dtype=np.int64)
        width = next((ex.features.shape[1] for ex in group if ex.features is not None), None)
        feats = np.zeros((len(group), T, width)) if width is not None else None
        for r, (ex, n) in enumerate(zip(group, lengths)):
            ids[r, :n] = ex.ids[:n]
            labels[r, :n] = ex.labels[:n]
            mask[r, :n] = 1
            if feats is not None:
                feats[r, :n] = ex.features[:n]
        weights = np.array([ex.weight for ex in group], dtype=np.float64)
        batches.append(Batch(ids, labels, mask, feats, weights, truncated))
    return batches


def batch_loss(model, tape, batch, training=True):
    """Masked mean cross-entropy: averaged over real tokens only."""
    return model.loss(tape, [ex for ex in batch.examples() if len(ex)], training=training)


def clip_gradients(params, max_norm):
    total = float(np.sqrt(sum(float(np.sum(p.grad * p.grad)) for p in params)))
    if max_norm is not None and total > max_norm:
        scale = max_norm / total
        for p in params:
            p.grad = p.grad * scale
    return total


@dataclass
class EarlyStopState:
    best_f1: float = -1.0
    best_step: int = -1
    snapshot: dict | None = None

    def update(self, f1, step, params):
        """Record a validation score; returns True when it is a new best."""
        if f1 > self.best_f1:
            self.best_f1 = f1
            self.best_step = step
            self.snapshot = {name: p.data.copy() for name, p in params.items()}
            return True
        return False

    def exhausted(self, step, patience):
        return patience is not None and self.best_step >= 0 and step - self.best_step >= patience


@dataclass
class TrainResult:
    best_f1: float
    best_step: int
    steps: int
    epochs: int
    stop_reason: str
    wall_time: float
    history: list = field(default_factory=list)

    def summary(self, config=None, train_config=None):
        out = {k: v for k, v in asdict(self).items() if k != "history"}
        if config is not None:
            out["model_config"] = config.to_dict()
        if train_config is not None:
            out["train_config"] = asdict(train_config)
        return out


def train(model, train_set, validation_set, config, progress=None, target_f1=None):
    """Train ``model`` in place and leave it at the best validation checkpoint.

    ``train_set``/``validation_set`` are lists of :class:`Example`. Without a
    validation set the final parameters are kept. ``target_f1`` stops training
    once validation reaches that score. ``progress`` receives one dict per
    validation (step, epoch, lr, train_loss, val_f1).
    """
    if not train_set:
        raise ConfigError("cannot train on an empty training set")
    rng = np.random.default_rng(config.seed)
    params = model.parameters()
    state = EarlyStopState()
    history = []
    step = 0
    t0 = time.perf_counter()
    stop_reason = "max_epochs"
    recent = []

    def validate(epoch, lr):
        f1 = evaluate_model(model, validation_set).f1
        improved = state.update(f1, step, model.params)
        entry = {"step": step, "epoch": epoch, "lr": lr,
                 "train_loss": float(np.mean(recent)) if recent else float("nan"), "val_f1": f1}
        history.append(entry)
        recent.clear()
        if progress is not None:
            progress(entry)
        log.debug("step %d epoch %d f1 %.2f%s", step, epoch, f1, " *" if improved else "")

    epoch = 0
    done = False
    for epoch in range(config.max_epochs):
        lr = config.lr_at(epoch)
        order = rng.permutation(len(train_set)) if config.shuffle else np.arange(len(train_set))
        batches = make_batches([train_set[i] for i in order], config.batch_size, config.max_len)
        for batch in batches:
            tape = Tape(rng=rng)
            model.zero_grad()
            loss = batch_loss(model, tape, batch, training=True)
            tape.backward(loss)
            clip_gradients(params, config.clip_norm)
            for p in params:
                p.data -= lr * p.grad
            recent.append(float(loss.data))
            step += 1
            if validation_set and config.eval_every and step % config.eval_every == 0:
                validate(epoch, lr)
                if target_f1 is not None and state.best_f1 >= target_f1:
                    stop_reason, done = "target_f1", True
                elif state.exhausted(step, config.patience_steps):
                    stop_reason, done = "patience", True
                if done:
                    break
        if done:
            break
        if validation_set and not config.eval_every:
            validate(epoch, lr)
            if target_f1 is not None and state.best_f1 >= target_f1:
                stop_reason = "target_f1"
                break
            if state.exhausted(step, config.patience_steps):
                stop_reason = "patience"
                break
    if state.snapshot is not None:
        for name, p in model.params.items():
            p.data[...] = state.snapshot[name]
    return TrainResult(state.best_f1, state.best_step, step, epoch + 1, stop_reason,
                       time.perf_counter() - t0, history)


@dataclass
class Fold:
    train: list
    validation: list
    test: list


def kfold_split(items, k=5, val_fraction=0.1, seed=0):
    """Shuffle once, cut ``k`` contiguous test shards; the first
    ``val_fraction`` of each remaining development part is validation."""
    n = len(items)
    if k < 2:
        raise ConfigError(f"k must be at least 2, got {k}")
    if k > n:
        raise ConfigError(f"cannot make {k} folds from {n} items")
    order = np.random.default_rng(seed).permutation(n)
    shards = np.array_split(order, k)
    folds = []
    for i, shard in enumerate(shards):
        dev = np.concatenate([s for j, s in enumerate(shards) if j != i])
        n_val = int(val_fraction * len(dev) + 0.5)
        folds.append(Fold(train=[items[j] for j in dev[n_val:]],
                          validation=[items[j] for j in dev[:n_val]],
                          test=[items[j] for j in shard]))
    return folds
