import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aspecttag.numkernel import CE_EPSILON, ConfigError, Parameter, ShapeError, Tape, Tensor, UsageError

floats = st.floats(-20, 20, allow_nan=False)


def triple_loop(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


class TestMatmul:
    def test_identity(self, rng):
        B = rng.normal(size=(3, 4))
        assert np.array_equal(Tape().matmul(Tensor(np.eye(3)), Tensor(B)).data, B)

    def test_scalar_matrices(self):
        assert Tape().matmul(Tensor([[2.0]]), Tensor([[3.0]])).data.tolist() == [[6.0]]

    def test_against_triple_loop(self, rng):
        a, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
        assert np.max(np.abs(Tape().matmul(Tensor(a), Tensor(b)).data - triple_loop(a, b))) < 1e-12

    def test_shape_error_names_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
            Tape().matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_gradient(self, rng):
        A = Parameter(rng.normal(size=(2, 3)))
        B = Parameter(rng.normal(size=(3, 4)))
        tape = Tape()
        tape.backward(tape.sum(tape.matmul(A, B)))
        assert np.allclose(A.grad, np.ones((2, 4)) @ B.data.T)
        assert np.allclose(B.grad, A.data.T @ np.ones((2, 4)))


class TestElementwise:
    def test_fixed_points(self):
        t = Tape()
        assert t.sigmoid(Tensor(0.0)).data == 0.5
        assert t.tanh(Tensor(0.0)).data == 0.0

    def test_sigmoid_one(self):
        oracle = float(1 / (1 + mpmath.e ** -1))
        assert abs(oracle - 0.73105857863) < 1e-11
        assert abs(Tape().sigmoid(Tensor(1.0)).data - oracle) < 1e-11

    def test_extremes_stay_finite(self):
        out = Tape().sigmoid(Tensor(np.array([-800.0, 800.0]))).data
        assert out.tolist() == [0.0, 1.0]

    @given(arrays(np.float64, st.integers(1, 8), elements=floats))
    def test_sigmoid_matches_mpmath(self, x):
        out = Tape(record=False).sigmoid(Tensor(x)).data
        ref = np.array([float(1 / (1 + mpmath.exp(-mpmath.mpf(v)))) for v in x])
        assert np.allclose(out, ref, rtol=1e-13, atol=1e-300)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Tape().elementwise("relu", Tensor(1.0))


class TestSoftmax:
    def test_symmetric(self):
        assert Tape().softmax(Tensor([0.0, 0.0])).data.tolist() == [0.5, 0.5]

    @given(st.floats(-1e6, 1e6))
    def test_constant_input_is_uniform(self, c):
        assert np.allclose(Tape(record=False).softmax(Tensor(np.full(4, c))).data, 0.25, atol=1e-15)

    def test_one_two_three(self):
        with mpmath.workdps(30):
            e = [mpmath.exp(k) for k in (1, 2, 3)]
            ref = [float(x / sum(e)) for x in e]
        out = Tape().softmax(Tensor([1.0, 2.0, 3.0])).data
        assert np.allclose(out, ref, atol=1e-15)
        assert np.round(out, 5).tolist() == [0.09003, 0.24473, 0.66524]

    @given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 6)), elements=st.floats(-500, 500)))
    def test_rows_sum_to_one(self, x):
        out = Tape(record=False).softmax(Tensor(x)).data
        assert np.all(out >= 0)
        assert np.allclose(out.sum(axis=-1), 1.0, atol=1e-12)


class TestCrossEntropy:
    def test_perfect(self):
        assert Tape().cross_entropy(Tensor([1.0, 0.0]), np.array([1.0, 0.0])).data == 0.0

    def test_uniform(self):
        assert abs(Tape().cross_entropy(Tensor([0.5, 0.5]), np.array([1.0, 0.0])).data - math.log(2)) < 1e-12

    def test_value(self):
        out = Tape().cross_entropy(Tensor([0.7, 0.3]), np.array([0.0, 1.0])).data
        assert abs(out - float(-mpmath.log(mpmath.mpf("0.3")))) < 1e-12
        assert round(float(out), 6) == 1.203973

    def test_zero_probability_is_clamped(self):
        out = Tape().cross_entropy(Tensor([1.0, 0.0]), np.array([0.0, 1.0])).data
        assert abs(out + math.log(CE_EPSILON)) < 1e-9

    def test_integer_gold(self):
        t = Tape()
        P = Tensor(np.array([[0.7, 0.3], [0.2, 0.8]]))
        assert np.allclose(t.cross_entropy(P, np.array([1, 1]), reduction="none").data, [-math.log(0.3), -math.log(0.8)])


class TestDropout:
    def test_keep_one_is_identity(self, rng):
        x = Tensor(rng.normal(size=10))
        assert Tape(rng=rng).dropout(x, 1.0, training=True) is x

    def test_inference_is_identity(self, rng):
        x = Tensor(rng.normal(size=10))
        assert Tape(rng=rng).dropout(x, 0.5, training=False) is x

    def test_mean_preserved(self):
        out = Tape(rng=np.random.default_rng(0)).dropout(Tensor(np.ones(100_000)), 0.8, training=True).data
        assert 0.99 <= out.mean() <= 1.01
        assert set(np.unique(out)) <= {0.0, 1.25}

    @pytest.mark.parametrize("keep", [0.0, -0.5, 1.5])
    def test_bad_keep(self, keep):
        with pytest.raises(ConfigError):
            Tape().dropout(Tensor(np.ones(3)), keep, training=True)


class TestBackward:
    def test_square(self):
        x = Parameter(np.array(3.0))
        t = Tape()
        t.backward(t.mul(x, x))
        assert x.grad == 6.0

    def test_softmax_cross_entropy_gradient(self, rng):
        z = Parameter(rng.normal(size=5))
        gold = np.eye(5)[2]
        t = Tape()
        p = t.softmax(z)
        t.backward(t.cross_entropy(p, gold, reduction="sum"))
        assert np.allclose(z.grad, p.data - gold, atol=1e-12)

    def test_loss_not_on_tape(self):
        with pytest.raises(UsageError):
            Tape().backward(Tensor(1.0))

    def test_non_scalar_loss(self):
        t = Tape()
        x = Parameter(np.ones(3))
        with pytest.raises(UsageError):
            t.backward(t.mul(x, x))

    def test_gradients_accumulate(self):
        x = Parameter(np.array(2.0))
        for _ in range(2):
            t = Tape()
            t.backward(t.mul(x, x))
        assert x.grad == 8.0
        x.zero_grad()
        assert x.grad == 0.0

    def test_broadcast_add_gradient(self, rng):
        A = Parameter(rng.normal(size=(4, 3)))
        b = Parameter(rng.normal(size=3))
        t = Tape()
        t.backward(t.sum(t.add(A, b)))
        assert np.array_equal(b.grad, np.full(3, 4.0))

    def test_non_finite_forward_raises(self):
        with pytest.raises(FloatingPointError):
            Tape().add(Tensor(np.array([np.inf])), Tensor(np.array([1.0])))

    def test_unrecorded_tape_keeps_no_nodes(self):
        t = Tape(record=False)
        t.sigmoid(Parameter(np.ones(3)))
        assert len(t) == 0


def finite_difference(f, x, eps=1e-5):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + eps
        hi = f()
        x[idx] = old - eps
        lo = f()
        x[idx] = old
        g[idx] = (hi - lo) / (2 * eps)
    return g


@pytest.mark.parametrize("op", ["gather", "slice", "concat", "reshape", "transpose", "pairwise_add", "scale", "mean"])
def test_structural_op_gradients(op, rng):
    A = Parameter(rng.normal(size=(3, 4)))
    B = Parameter(rng.normal(size=(3, 4)))
    w = rng.normal(size=(12,))

    def build(t):
        if op == "gather":
            y = t.gather(A, np.array([2, 0, 2]))
        elif op == "slice":
            y = t.slice(A, 1, 3, axis=1)
        elif op == "concat":
            y = t.concat([A, B], axis=0)
        elif op == "reshape":
            y = t.reshape(A, (4, 3))
        elif op == "transpose":
            y = t.transpose(A)
        elif op == "pairwise_add":
            y = t.pairwise_add(A, B)
        elif op == "scale":
            y = t.scale(A, 0.3)
        else:
            return t.mean(t.tanh(A))
        flat = t.reshape(t.tanh(y), (-1,))
        return t.sum(t.mul(flat, Tensor(np.resize(w, flat.shape[0]))))

    t = Tape()
    t.backward(build(t))
    num = finite_difference(lambda: float(build(Tape(record=False)).data), A.data)
    assert np.allclose(A.grad, num, atol=1e-8)
