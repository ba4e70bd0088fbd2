"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every differentiable operation is a method on :class:`Tape`. A tape created
with ``record=False`` evaluates the same operations without keeping any
backward state, which is what inference uses. There is no global tape.

    >>> tape = Tape()
    >>> x = Parameter(np.array(3.0), name="x")
    >>> loss = tape.mul(x, x)
    >>> tape.backward(loss)
    >>> float(x.grad)
    6.0
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ._kernels import backend as _recurrence

CE_EPSILON = 1e-12


class ShapeError(ValueError):
    pass


class UsageError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


class Tensor:
    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """A trainable tensor. Its gradient accumulates across backward calls."""

    __slots__ = ("name",)

    def __init__(self, data, name=""):
        super().__init__(np.array(data, dtype=np.float64), requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.shape})"


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _sigmoid(z):
    return expit(z)


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tape:
    """Ordered record of primitive operations.

    ``rng`` is the generator used by stochastic ops (dropout); it is passed in
    explicitly so runs are reproducible.
    """

    def __init__(self, record=True, rng=None, check_finite=True):
        self.record = record
        self.rng = rng
        self.check_finite = check_finite
        self.nodes = []
        self._outputs = set()

    def __len__(self):
        return len(self.nodes)

    def _emit(self, data, inputs, backward):
        if self.check_finite and not np.all(np.isfinite(data)):
            raise FloatingPointError("non-finite value produced in forward pass")
        tracked = self.record and any(t.requires_grad for t in inputs)
        out = Tensor(data, requires_grad=tracked)
        if tracked:
            self.nodes.append((out, inputs, backward))
            self._outputs.add(id(out))
        return out

    # linear algebra

    def matmul(self, a, b):
        a, b = as_tensor(a), as_tensor(b)
        A, B = a.data, b.data
        if A.ndim == 0 or B.ndim == 0 or B.ndim > 2 or A.shape[-1] != B.shape[0]:
            raise ShapeError(f"matmul shape mismatch: {A.shape} x {B.shape}")

        def backward(g):
            if B.ndim == 2:
                if A.ndim == 1:
                    return B @ g, np.outer(A, g)
                return g @ B.T, A.T @ g
            # vector right operand: A (..., k) @ B (k,)
            return g[..., None] * B, np.tensordot(g, A, axes=g.ndim)

        return self._emit(A @ B, (a, b), backward)

    def transpose(self, x):
        x = as_tensor(x)
        if x.data.ndim != 2:
            raise ShapeError(f"transpose needs a matrix, got {x.shape}")
        return self._emit(x.data.T.copy(), (x,), lambda g: (g.T,))

    def add(self, a, b):
        """Elementwise sum; ``b`` may broadcast along leading axes (bias)."""
        a, b = as_tensor(a), as_tensor(b)
        try:
            out = a.data + b.data
        except ValueError:
            raise ShapeError(f"add shape mismatch: {a.shape} + {b.shape}") from None
        sa, sb = a.shape, b.shape
        return self._emit(out, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))

    def pairwise_add(self, a, b):
        """``out[i, j] = a[i] + b[j]`` for row sets a (n, k) and b (m, k)."""
        a, b = as_tensor(a), as_tensor(b)
        if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[1]:
            raise ShapeError(f"pairwise_add shape mismatch: {a.shape}, {b.shape}")
        out = a.data[:, None, :] + b.data[None, :, :]
        return self._emit(out, (a, b), lambda g: (g.sum(axis=1), g.sum(axis=0)))

    def mul(self, a, b):
        a, b = as_tensor(a), as_tensor(b)
        if a.shape != b.shape:
            raise ShapeError(f"mul shape mismatch: {a.shape} * {b.shape}")
        A, B = a.data, b.data
        return self._emit(A * B, (a, b), lambda g: (g * B, g * A))

    def scale(self, x, c):
        x = as_tensor(x)
        c = float(c)
        return self._emit(x.data * c, (x,), lambda g: (g * c,))

    # nonlinearities

    def elementwise(self, kind, x):
        x = as_tensor(x)
        if kind == "sigmoid":
            y = _sigmoid(x.data)
            return self._emit(y, (x,), lambda g: (g * y * (1.0 - y),))
        if kind == "tanh":
            y = np.tanh(x.data)
            return self._emit(y, (x,), lambda g: (g * (1.0 - y * y),))
        raise ValueError(f"unknown elementwise kind {kind!r}")

    def sigmoid(self, x):
        return self.elementwise("sigmoid", x)

    def tanh(self, x):
        return self.elementwise("tanh", x)

    def softmax(self, x):
        """Softmax over the last axis, max-shifted for stability."""
        x = as_tensor(x)
        if x.data.size == 0:
            raise ShapeError("softmax of an empty tensor")
        z = np.exp(x.data - x.data.max(axis=-1, keepdims=True))
        y = z / z.sum(axis=-1, keepdims=True)

        def backward(g):
            return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

        return self._emit(y, (x,), backward)

    def cross_entropy(self, pred, gold, reduction="mean"):
        """Negative log-likelihood of gold indices under row distributions.

        ``pred`` is (n, L) or (L,); ``gold`` holds n integer indices (or one),
        or one-hot rows shaped like ``pred``. Probabilities are clamped at
        ``CE_EPSILON`` before the log.
        """
        pred = as_tensor(pred)
        P = pred.data if pred.data.ndim == 2 else pred.data[None, :]
        gold = np.asarray(gold)
        if gold.shape == pred.shape and gold.dtype.kind == "f":
            gold = np.argmax(gold.reshape(P.shape), axis=1)
        gold = np.atleast_1d(gold.astype(np.int64))
        if gold.shape[0] != P.shape[0]:
            raise ShapeError(f"cross_entropy: {P.shape[0]} rows but {gold.shape[0]} gold labels")
        rows = np.arange(P.shape[0])
        p = P[rows, gold]
        clamped = p < CE_EPSILON
        losses = -np.log(np.maximum(p, CE_EPSILON))
        if reduction == "none":
            out = losses
        elif reduction == "sum":
            out = np.array(losses.sum())
        elif reduction == "mean":
            out = np.array(losses.mean())
        else:
            raise ValueError(f"unknown reduction {reduction!r}")
        n = P.shape[0]

        def backward(g):
            if reduction == "none":
                coef = g
            elif reduction == "sum":
                coef = np.full(n, float(g))
            else:
                coef = np.full(n, float(g) / n)
            dP = np.zeros_like(P)
            dP[rows, gold] = np.where(clamped, 0.0, -coef / np.where(clamped, 1.0, p))
            return (dP.reshape(pred.shape),)

        return self._emit(out, (pred,), backward)

    def dropout(self, x, keep, training):
        """Inverted dropout: kept units are scaled by 1/keep while training."""
        if not 0.0 < keep <= 1.0:
            raise ConfigError(f"dropout keep probability must be in (0, 1], got {keep}")
        x = as_tensor(x)
        if not training or keep == 1.0:
            return x
        if self.rng is None:
            raise UsageError("dropout in training mode needs a tape rng")
        mask = (self.rng.random(x.shape) < keep) / keep
        return self._emit(x.data * mask, (x,), lambda g: (g * mask,))

    # structure

    def concat(self, tensors, axis=-1):
        tensors = [as_tensor(t) for t in tensors]
        try:
            out = np.concatenate([t.data for t in tensors], axis=axis)
        except ValueError as err:
            raise ShapeError(f"concat: {[t.shape for t in tensors]}: {err}") from None
        sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]
        return self._emit(out, tuple(tensors), lambda g: tuple(np.split(g, sizes, axis=axis)))

    def slice(self, x, start, stop, axis=-1):
        x = as_tensor(x)
        index = [slice(None)] * x.data.ndim
        index[axis] = slice(start, stop)
        index = tuple(index)

        def backward(g):
            dx = np.zeros_like(x.data)
            dx[index] = g
            return (dx,)

        return self._emit(x.data[index].copy(), (x,), backward)

    def gather(self, x, idx):
        """Row lookup ``x[idx]``; gradients scatter-add back into rows."""
        x = as_tensor(x)
        idx = np.asarray(idx, dtype=np.int64)

        def backward(g):
            dx = np.zeros_like(x.data)
            np.add.at(dx, idx, g)
            return (dx,)

        return self._emit(x.data[idx], (x,), backward)

    def reshape(self, x, shape):
        x = as_tensor(x)
        old = x.shape
        return self._emit(x.data.reshape(shape), (x,), lambda g: (g.reshape(old),))

    def sum(self, x):
        x = as_tensor(x)
        shape = x.shape
        return self._emit(np.array(x.data.sum()), (x,), lambda g: (np.full(shape, float(g)),))

    def mean(self, x):
        x = as_tensor(x)
        shape, n = x.shape, x.data.size
        return self._emit(np.array(x.data.mean()), (x,), lambda g: (np.full(shape, float(g) / n),))

    # fused recurrences

    def recurrence(self, cell, Zx, U, reverse=False):
        """Run an Elman or LSTM recurrence over pre-projected inputs.

        ``Zx`` is (n, G) with G = hidden for Elman and 4*hidden for LSTM
        (gate order input, forget, output, candidate); ``U`` is (G, hidden).
        Initial hidden and cell states are zero. Returns H (n, hidden).
        """
        Zx, U = as_tensor(Zx), as_tensor(U)
        z, u = np.ascontiguousarray(Zx.data), np.ascontiguousarray(U.data)
        hidden = u.shape[1]
        gates = {"elman": 1, "lstm": 4}.get(cell)
        if gates is None:
            raise ValueError(f"unknown cell {cell!r}")
        if z.ndim != 2 or u.shape[0] != gates * hidden or z.shape[1] != gates * hidden:
            raise ShapeError(f"{cell} recurrence shape mismatch: Zx {z.shape}, U {u.shape}")
        if cell == "elman":
            H = _recurrence.elman_forward(z, u, reverse)

            def backward(g):
                return _recurrence.elman_backward(u, H, np.ascontiguousarray(g), reverse)
        else:
            H, C, G = _recurrence.lstm_forward(z, u, reverse)

            def backward(g):
                return _recurrence.lstm_backward(u, H, C, G, np.ascontiguousarray(g), reverse)

        return self._emit(H, (Zx, U), backward)

    # reverse pass

    def backward(self, loss):
        """Accumulate d(loss)/d(param) into every Parameter reached.

        Non-parameter tracked tensors get their ``.grad`` overwritten.
        """
        if not self.record or id(loss) not in self._outputs:
            raise UsageError("backward() needs a loss recorded on this tape")
        if loss.data.size != 1:
            raise UsageError(f"loss must be a scalar, got shape {loss.shape}")
        grads = {id(loss): np.ones_like(loss.data)}
        leaves = {}
        for out, inputs, fn in reversed(self.nodes):
            g = grads.pop(id(out), None)
            if g is None:
                continue
            out.grad = g
            for inp, gi in zip(inputs, fn(g)):
                if gi is None or not inp.requires_grad:
                    continue
                key = id(inp)
                if key in grads:
                    grads[key] = grads[key] + gi
                else:
                    grads[key] = gi
                if key not in self._outputs:
                    leaves[key] = inp
        for key, leaf in leaves.items():
            g = grads.get(key)
            if g is None:
                continue
            if isinstance(leaf, Parameter):
                leaf.grad = leaf.grad + g
            else:
                leaf.grad = g
