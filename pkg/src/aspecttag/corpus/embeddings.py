"""Word embedding tables loaded from word2vec-text or GloVe-text files."""

from __future__ import annotations

import warnings

import numpy as np

from .types import CorpusError

PAD, UNK = "<PAD>", "<UNK>"
PAD_ID, UNK_ID = 0, 1


class EmbeddingFormatError(CorpusError):
    pass


class EmbeddingTable:
    """Rows 0 and 1 are always PAD (zeros) and UNK."""

    def __init__(self, vocab, matrix):
        self.vocab = dict(vocab)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        if self.vocab.get(PAD) != PAD_ID or self.vocab.get(UNK) != UNK_ID:
            raise ValueError("PAD and UNK must occupy rows 0 and 1")
        if self.matrix.shape[0] != len(self.vocab):
            raise ValueError(f"{len(self.vocab)} words but {self.matrix.shape[0]} rows")
        self.warnings = []

    @property
    def dim(self):
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.vocab)

    def lookup(self, word):
        """Exact match, then lowercase, then UNK."""
        idx = self.vocab.get(word)
        if idx is None:
            idx = self.vocab.get(word.lower(), UNK_ID)
        return idx

    def ids(self, words):
        return np.array([self.lookup(w) for w in words], dtype=np.int64)

    @classmethod
    def random(cls, words, dim, rng, scale=0.1):
        vocab = {PAD: PAD_ID, UNK: UNK_ID}
        for w in words:
            vocab.setdefault(w, len(vocab))
        matrix = rng.uniform(-scale, scale, size=(len(vocab), dim))
        matrix[PAD_ID] = 0.0
        return cls(vocab, matrix)

    def restrict(self, words):
        """Sub-table holding only rows reachable from ``words``."""
        keep = sorted({self.lookup(w) for w in words} - {PAD_ID, UNK_ID})
        inverse = {i: w for w, i in self.vocab.items()}
        vocab = {PAD: PAD_ID, UNK: UNK_ID}
        for i in keep:
            vocab[inverse[i]] = len(vocab)
        matrix = self.matrix[[PAD_ID, UNK_ID] + keep]
        return EmbeddingTable(vocab, matrix)


def load_embeddings(data, fmt="word2vec-text", rng=None):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8", errors="replace")
    if fmt not in ("word2vec-text", "glove-text"):
        raise ValueError(f"unknown embedding format {fmt!r}")
    rng = rng if rng is not None else np.random.default_rng(0)
    lines = data.splitlines()
    dim = None
    declared = None
    start = 0
    if fmt == "word2vec-text":
        if not lines:
            raise EmbeddingFormatError("line 1: missing 'count dim' header")
        head = lines[0].split()
        try:
            declared, dim = int(head[0]), int(head[1])
        except (IndexError, ValueError):
            raise EmbeddingFormatError(f"line 1: expected 'count dim' header, got {lines[0]!r}") from None
        start = 1

    words, rows, notes = {}, [], []
    for lineno, line in enumerate(lines[start:], start + 1):
        parts = line.rstrip().split(" ")
        if not parts or not parts[0]:
            continue
        if dim is None:
            dim = len(parts) - 1
        if len(parts) != dim + 1:
            raise EmbeddingFormatError(f"line {lineno}: expected {dim} values, got {len(parts) - 1}")
        try:
            vec = [float(v) for v in parts[1:]]
        except ValueError:
            raise EmbeddingFormatError(f"line {lineno}: non-numeric value") from None
        word = parts[0]
        if word in words:
            notes.append(f"line {lineno}: duplicate word {word!r}, keeping last occurrence")
            rows[words[word]] = vec
        else:
            words[word] = len(rows)
            rows.append(vec)
    if dim is None:
        raise EmbeddingFormatError("no embedding rows")
    if declared is not None and declared != len(rows) + sum(1 for n in notes if "duplicate" in n):
        notes.append(f"header declares {declared} rows, found {len(rows)} distinct words")

    vocab = {PAD: PAD_ID, UNK: UNK_ID}
    matrix = np.zeros((len(rows) + 2, dim))
    matrix[UNK_ID] = rng.uniform(-0.1, 0.1, size=dim)
    for word, i in words.items():
        vocab[word] = len(vocab)
        matrix[vocab[word]] = rows[i]
    table = EmbeddingTable(vocab, matrix)
    table.warnings = notes
    for note in notes:
        warnings.warn(note, stacklevel=2)
    return table


def context_window(vectors, i, d, pad):
    """Concatenate ``vectors[i-d .. i+d]``, substituting ``pad`` off the edges."""
    n = len(vectors)
    parts = [vectors[j] if 0 <= j < n else pad for j in range(i - d, i + d + 1)]
    return np.concatenate(parts)


def window_indices(n, d):
    """(n, 2d+1) row indices into ``[pad; x_0 .. x_{n-1}]``; 0 selects the pad row."""
    offsets = np.arange(-d, d + 1)
    pos = np.arange(n)[:, None] + offsets[None, :]
    return np.where((pos >= 0) & (pos < n), pos + 1, 0)
