"""Attention-RNN tagger and the Elman / Jordan / LSTM baselines.

Each architecture maps a sentence to one label distribution per token:

* ``ARNN``: a (bi)directional LSTM first pass over context windows, then a
  global-attention decoder that scores every hidden state for each position
  and predicts ``softmax(W_s [h_i; t_i; y_{i-1}])``.
* ``RNN``/``LSTM`` (and ``BiRNN``/``BiLSTM``): per-token output
  ``softmax(U_fwd h_fwd + U_bwd h_bwd)``.
* ``JRNN``: Jordan recurrence, the hidden state sees the previous label.

The previous label is the gold one during training (teacher forcing) and the
greedy prediction at inference; position 0 sees a reserved start symbol.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.special import expit

from .corpus import PAD_ID, TagScheme, sentence_features, window_indices
from .numkernel import ConfigError, Parameter, ShapeError, Tape, Tensor

ARCHITECTURES = ("ARNN", "RNN", "JRNN", "LSTM", "BiRNN", "BiLSTM")
_CELL = {"ARNN": "lstm", "RNN": "elman", "BiRNN": "elman", "LSTM": "lstm", "BiLSTM": "lstm", "JRNN": "jordan"}


def canonical_architecture(name, bidirectional=None):
    lookup = {a.lower(): a for a in ARCHITECTURES}
    arch = lookup.get(name.lower())
    if arch is None:
        raise ConfigError(f"unknown architecture {name!r}; choose from {', '.join(ARCHITECTURES)}")
    if bidirectional:
        if arch == "JRNN":
            raise ConfigError("JRNN is a unidirectional baseline; --bidirectional is not supported for it")
        arch = {"RNN": "BiRNN", "LSTM": "BiLSTM"}.get(arch, arch)
    elif bidirectional is False and arch in ("BiRNN", "BiLSTM"):
        arch = arch[2:]
    return arch


@dataclass
class ModelConfig:
    architecture: str = "ARNN"
    hidden_size: int = 100
    window: int = 1
    dropout_keep: float = 1.0
    use_features: bool = False
    pred_features: bool = False
    scheme_mode: str = "AE"
    embedding_dim: int = 50
    bidirectional: bool = True
    attention_size: int = 0
    use_hn: bool = False
    freeze_embeddings: bool = False

    def __post_init__(self):
        self.architecture = canonical_architecture(self.architecture)
        if self.architecture in ("BiRNN", "BiLSTM"):
            self.bidirectional = True
        elif self.architecture != "ARNN":
            self.bidirectional = False
        self.scheme_mode = self.scheme_mode.upper()
        if self.scheme_mode not in ("AE", "AESC"):
            raise ConfigError(f"scheme_mode must be AE or AESC, got {self.scheme_mode!r}")
        if self.hidden_size < 1 or self.embedding_dim < 1:
            raise ConfigError("hidden_size and embedding_dim must be positive")
        if self.window < 0:
            raise ConfigError(f"window radius must be >= 0, got {self.window}")
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ConfigError(f"dropout keep probability must be in (0, 1], got {self.dropout_keep}")
        if self.pred_features and not self.use_features:
            raise ConfigError("pred_features requires use_features")
        if self.attention_size <= 0:
            self.attention_size = self.state_size

    @property
    def cell(self):
        return _CELL[self.architecture]

    @property
    def directions(self):
        return 2 if self.bidirectional else 1

    @property
    def state_size(self):
        return self.hidden_size * self.directions

    @property
    def input_size(self):
        return (2 * self.window + 1) * self.embedding_dim

    @property
    def n_labels(self):
        return 3 if self.scheme_mode == "AE" else 7

    @property
    def feature_size(self):
        if not self.use_features:
            return 0
        return 17 if self.pred_features else 14

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def glorot(rng, shape):
    fan_out, fan_in = shape[0], shape[1] if len(shape) > 1 else 1
    r = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-r, r, size=shape)


def init_params(config, embedding_matrix, rng):
    """Fresh parameters for ``config``; embeddings are copied from the table."""
    c = config
    L = c.n_labels
    params = {"embeddings": Parameter(np.array(embedding_matrix, dtype=np.float64), "embeddings")}
    if embedding_matrix.shape[1] != c.embedding_dim:
        raise ConfigError(f"embedding table has dim {embedding_matrix.shape[1]}, config says {c.embedding_dim}")

    def add(name, shape, zero=False):
        params[name] = Parameter(np.zeros(shape) if zero else glorot(rng, shape), name)

    h = c.hidden_size
    if c.cell == "jordan":
        add("W", (h, c.input_size))
        add("U", (h, L + 1))
        add("b", (h,), zero=True)
    else:
        gates = 4 if c.cell == "lstm" else 1
        for d in ("fwd", "bwd")[: c.directions]:
            add(f"W_{d}", (gates * h, c.input_size))
            add(f"U_{d}", (gates * h, h))
            add(f"b_{d}", (gates * h,), zero=True)

    if c.architecture == "ARNN":
        S = c.state_size
        add("W_alpha", (c.attention_size, 2 * S))
        add("v", (c.attention_size,))
        intake = 2 * S + (L + 1) + c.feature_size + (S if c.use_hn else 0)
        add("W_s", (L, intake))
    else:
        if c.directions == 2:
            add("U_out_fwd", (L, h))
            add("U_out_bwd", (L, h))
        else:
            add("U_out", (L, h))
        if c.feature_size:
            add("U_feat", (L, c.feature_size))
    return params


# single-step cells, written with primitive tape ops

def elman_step(tape, x, h_prev, W, U, b):
    """h = sigmoid(W x + U h_prev + b)"""
    _check(W, x, U, h_prev)
    return tape.sigmoid(tape.add(tape.add(tape.matmul(W, x), tape.matmul(U, h_prev)), b))


def jordan_step(tape, x, y_prev, W, U, b):
    """h = sigmoid(W x + U y_prev + b); y_prev is a label distribution."""
    _check(W, x, U, y_prev)
    return tape.sigmoid(tape.add(tape.add(tape.matmul(W, x), tape.matmul(U, y_prev)), b))


def lstm_step(tape, x, h_prev, c_prev, W, U, b):
    _check(W, x, U, h_prev)
    h = U.shape[1]
    z = tape.add(tape.add(tape.matmul(W, x), tape.matmul(U, h_prev)), b)
    i = tape.sigmoid(tape.slice(z, 0, h))
    f = tape.sigmoid(tape.slice(z, h, 2 * h))
    o = tape.sigmoid(tape.slice(z, 2 * h, 3 * h))
    g = tape.tanh(tape.slice(z, 3 * h, 4 * h))
    c = tape.add(tape.mul(f, c_prev), tape.mul(i, g))
    return tape.mul(o, tape.tanh(c)), c


def _check(W, x, U, prev):
    if W.shape[1] != x.shape[-1] or U.shape[1] != prev.shape[-1] or W.shape[0] != U.shape[0]:
        raise ConfigError(
            f"cell dimension mismatch: W {W.shape}, x {x.shape}, U {U.shape}, previous state {prev.shape}")


# sequence-level building blocks

def embed(tape, params, ids, window, weight=1.0, freeze=False):
    """Look up rows, scale by the example weight, and build context windows.

    Off-sentence positions take the PAD row (unscaled, and trainable like
    any other row).
    """
    E = params["embeddings"]
    table = Tensor(E.data) if freeze else E
    X = tape.gather(table, ids)
    if weight != 1.0:
        X = tape.scale(X, weight)
    n, dim = len(ids), E.shape[1]
    pad = tape.gather(table, np.array([PAD_ID]))
    Xp = tape.concat([pad, X], axis=0)
    windows = tape.gather(Xp, window_indices(n, window))
    return tape.reshape(windows, (n, (2 * window + 1) * dim))


def run_direction(tape, Xbar, W, U, b, cell, reverse):
    Zx = tape.add(tape.matmul(Xbar, tape.transpose(W)), b)
    return tape.recurrence(cell, Zx, U, reverse=reverse)


def encode_bidirectional(tape, Xbar, params, cell, bidirectional=True):
    """Hidden states (n, dirs*h): forward pass, optional backward pass, concatenated."""
    if Xbar.shape[0] == 0:
        return []
    fwd = run_direction(tape, Xbar, params["W_fwd"], params["U_fwd"], params["b_fwd"], cell, False)
    if not bidirectional:
        return fwd
    bwd = run_direction(tape, Xbar, params["W_bwd"], params["U_bwd"], params["b_bwd"], cell, True)
    return tape.concat([fwd, bwd], axis=1)


def attention_scores(tape, h_i, H, W_alpha, v):
    """alpha_i over positions j: softmax_j(v . tanh(W_alpha [h_i; h_j]))."""
    n = H.shape[0]
    if n == 0:
        raise ShapeError("attention over an empty sequence")
    rows = tape.gather(tape.reshape(h_i, (1, -1)), np.zeros(n, dtype=np.int64))
    pairs = tape.concat([rows, H], axis=1)
    u = tape.matmul(tape.tanh(tape.matmul(pairs, tape.transpose(W_alpha))), v)
    return tape.softmax(u)


def context_vector(tape, alpha_i, H):
    """t_i = sum_j alpha_ij h_j"""
    return tape.matmul(alpha_i, H)


def attention(tape, H, W_alpha, v):
    """All positions at once: returns (alpha (n, n), T (n, S))."""
    S = H.shape[1]
    A = tape.matmul(H, tape.transpose(tape.slice(W_alpha, 0, S, axis=1)))
    B = tape.matmul(H, tape.transpose(tape.slice(W_alpha, S, 2 * S, axis=1)))
    u = tape.matmul(tape.tanh(tape.pairwise_add(A, B)), v)
    alpha = tape.softmax(u)
    return alpha, tape.matmul(alpha, H)


def decode_step(tape, h_i, t_i, y_prev, W_s, features=None):
    """softmax(W_s [h_i; t_i; y_prev (; features)])"""
    parts = [h_i, t_i, y_prev] + ([features] if features is not None else [])
    z = tape.concat(parts, axis=-1)
    if z.shape[-1] != W_s.shape[1]:
        raise ConfigError(f"decoder intake has {z.shape[-1]} entries, W_s expects {W_s.shape[1]}")
    return tape.softmax(tape.matmul(W_s, z))


def baseline_output(tape, h_fwd, params, h_bwd=None, features=None):
    """softmax(U_fwd h_fwd + U_bwd h_bwd (+ U_feat f)); works on vectors or row stacks."""
    def project(M, x):
        return tape.matmul(x, tape.transpose(M)) if x.data.ndim == 2 else tape.matmul(M, x)

    if h_bwd is not None:
        scores = tape.add(project(params["U_out_fwd"], h_fwd), project(params["U_out_bwd"], h_bwd))
    else:
        scores = project(params.get("U_out", params.get("U_out_fwd")), h_fwd)
    if features is not None:
        scores = tape.add(scores, project(params["U_feat"], features))
    return tape.softmax(scores)


def previous_label_matrix(labels, n_labels):
    """Teacher-forcing inputs: row i is one-hot of label i-1, row 0 the start symbol."""
    Y = np.zeros((len(labels), n_labels + 1))
    if len(labels):
        Y[0, n_labels] = 1.0
        Y[np.arange(1, len(labels)), np.asarray(labels[:-1], dtype=np.int64)] = 1.0
    return Y


@dataclass
class Example:
    """A sentence prepared for the network."""

    ids: np.ndarray
    labels: np.ndarray
    features: np.ndarray | None
    weight: float = 1.0
    sentence: object = None

    def __len__(self):
        return len(self.ids)


class Tagger:
    """Parameters plus the vocabulary and tag scheme needed to run them."""

    def __init__(self, config, params, vocab, scheme=None):
        self.config = config
        self.params = params
        self.vocab = vocab
        self.scheme = scheme or TagScheme(config.scheme_mode)
        if len(self.scheme) != config.n_labels:
            raise ConfigError("label vocabulary size does not match scheme_mode")

    @classmethod
    def create(cls, config, embeddings, rng, scheme=None):
        return cls(config, init_params(config, embeddings.matrix, rng), embeddings.vocab, scheme)

    def parameters(self):
        if self.config.freeze_embeddings:
            return [p for name, p in self.params.items() if name != "embeddings"]
        return list(self.params.values())

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def lookup(self, word):
        idx = self.vocab.get(word)
        if idx is None:
            idx = self.vocab.get(word.lower(), 1)
        return idx

    def encode(self, sentence, with_labels=True):
        from .corpus import encode_tags

        ids = np.array([self.lookup(t.surface) for t in sentence.tokens], dtype=np.int64)
        labels = np.array(encode_tags(sentence, self.scheme) if with_labels else [self.scheme.outside] * len(ids),
                          dtype=np.int64)
        feats = None
        if self.config.use_features:
            feats = sentence_features(sentence, use_pred=self.config.pred_features)
        return Example(ids, labels, feats, sentence.weight, sentence)

    # forward passes

    def forward(self, tape, example, training=False):
        """Per-token label distributions (n, L) as a tape tensor.

        Training uses gold previous labels; inference decodes greedily.
        """
        c, p = self.config, self.params
        n = len(example)
        if n == 0:
            return Tensor(np.zeros((0, c.n_labels)))
        Xbar = embed(tape, p, example.ids, c.window, example.weight, c.freeze_embeddings)
        feats = Tensor(example.features) if example.features is not None else None
        if c.cell == "jordan":
            return self._jordan(tape, Xbar, example, feats, training)
        H = encode_bidirectional(tape, Xbar, p, c.cell, c.bidirectional)
        H = tape.dropout(H, c.dropout_keep, training)
        if c.architecture != "ARNN":
            if c.bidirectional:
                h = c.hidden_size
                return baseline_output(tape, tape.slice(H, 0, h, axis=1), p,
                                       tape.slice(H, h, 2 * h, axis=1), feats)
            return baseline_output(tape, H, p, features=feats)
        _, T = attention(tape, H, p["W_alpha"], p["v"])
        static = [H, T]
        Ws = p["W_s"]
        S, L = c.state_size, c.n_labels
        if training:
            Y = Tensor(previous_label_matrix(example.labels, L))
            parts = [H, T, Y]
            if feats is not None:
                parts.append(feats)
            if c.use_hn:
                parts.append(tape.gather(H, np.full(n, n - 1)))
            Z = tape.concat(parts, axis=1)
            return tape.softmax(tape.matmul(Z, tape.transpose(Ws)))
        # greedy: everything but the previous-label block is position-static
        if feats is not None:
            static.append(feats)
        if c.use_hn:
            static.append(Tensor(np.repeat(H.data[n - 1:n], n, axis=0)))
        y_cols = slice(2 * S, 2 * S + L + 1)
        W_static = np.delete(Ws.data, np.arange(y_cols.start, y_cols.stop), axis=1)
        base = np.concatenate([t.data for t in static], axis=1) @ W_static.T
        return Tensor(_greedy(base, Ws.data[:, y_cols]))

    def _jordan(self, tape, Xbar, example, feats, training):
        c, p = self.config, self.params
        L = c.n_labels
        if training:
            Y = Tensor(previous_label_matrix(example.labels, L))
            Z = tape.add(tape.add(tape.matmul(Xbar, tape.transpose(p["W"])),
                                  tape.matmul(Y, tape.transpose(p["U"]))), p["b"])
            Hj = tape.dropout(tape.sigmoid(Z), c.dropout_keep, training)
            return baseline_output(tape, Hj, p, features=feats)
        W, U, b, Uo = p["W"].data, p["U"].data, p["b"].data, p["U_out"].data
        pre = Xbar.data @ W.T + b
        extra = feats.data @ p["U_feat"].data.T if feats is not None else 0.0
        out = np.zeros((len(example), L))
        prev = L
        for i in range(len(example)):
            h = expit(pre[i] + U[:, prev])
            s = Uo @ h + (extra[i] if feats is not None else 0.0)
            e = np.exp(s - s.max())
            out[i] = e / e.sum()
            prev = int(np.argmax(out[i]))
        return Tensor(out)

    def loss(self, tape, examples, training=True):
        """Mean cross-entropy over all real tokens of ``examples``."""
        losses = []
        total = 0
        for ex in examples:
            if len(ex) == 0:
                continue
            P = self.forward(tape, ex, training=training)
            losses.append(tape.cross_entropy(P, ex.labels, reduction="none"))
            total += len(ex)
        if not losses:
            raise ValueError("loss over zero tokens")
        return tape.scale(tape.sum(tape.concat(losses, axis=0)), 1.0 / total)

    def predict_ids(self, example):
        if len(example) == 0:
            return np.zeros(0, dtype=np.int64)
        P = self.forward(Tape(record=False), example, training=False)
        return np.argmax(P.data, axis=1)

    def predict_labels(self, example):
        return [self.scheme.label(i) for i in self.predict_ids(example)]


def _greedy(base, W_y):
    n, L = base.shape
    out = np.zeros((n, L))
    prev = L
    for i in range(n):
        s = base[i] + W_y[:, prev]
        e = np.exp(s - s.max())
        out[i] = e / e.sum()
        prev = int(np.argmax(out[i]))
    return out
