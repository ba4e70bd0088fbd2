
import numpy as np
import pytest

from aspecttag.models import ModelConfig, Tagger
from aspecttag.corpus import EmbeddingTable
from aspecttag.numkernel import ConfigError, Tape
from aspecttag.training import (EarlyStopState, TrainConfig, TruncationWarning, batch_loss, clip_gradients,
                                kfold_split, make_batches, train)

from conftest import random_example, small_model


def examples(model, lengths, seed=0):
    return [random_example(model, n, seed=seed + i) for i, n in enumerate(lengths)]


def synthetic_model(corpus, arch="ARNN", mode="AESC", seed=0, **kw):
    rng = np.random.default_rng(seed)
    words = sorted({t.surface for s in corpus for t in s.tokens})
    emb = EmbeddingTable.random(words, 50, rng)
    m = Tagger.create(ModelConfig(arch, hidden_size=32, window=1, scheme_mode=mode, embedding_dim=50, **kw), emb, rng)
    return m, [m.encode(s) for s in corpus]


class TestBatches:
    def test_sizes(self):
        m = small_model()
        assert [len(b) for b in make_batches(examples(m, [3] * 17), 16)] == [16, 1]

    def test_truncation(self):
        m = small_model()
        with pytest.warns(TruncationWarning):
            (b,) = make_batches(examples(m, [250, 4]), 16, max_len=200)
        assert b.ids.shape == (2, 200) and b.truncated == 1
        assert b.mask.sum(axis=1).tolist() == [200, 4]

    def test_padding_invariance(self):
        m = small_model("BiLSTM", "AESC", features=True)
        exs = examples(m, [2, 7, 4])
        (b,) = make_batches(exs, 3)
        batch = float(batch_loss(m, Tape(), b, training=False).data)
        singles = [float(m.loss(Tape(), [e], training=False).data) * len(e) for e in exs]
        assert abs(batch - sum(singles) / sum(len(e) for e in exs)) < 1e-10

    def test_padding_does_not_change_gradients(self):
        m = small_model("ARNN", "AE")
        exs = examples(m, [2, 6])
        t = Tape()
        t.backward(batch_loss(m, t, make_batches(exs, 2)[0]))
        padded = {k: p.grad.copy() for k, p in m.params.items()}
        m.zero_grad()
        t = Tape()
        t.backward(m.loss(t, exs))
        for k, p in m.params.items():
            assert np.array_equal(padded[k], p.grad)


class TestSchedule:
    def test_decay(self):
        assert abs(TrainConfig(learning_rate=0.01, decay_ratio=0.9).lr_at(3) - 0.00729) < 1e-15

    def test_defaults(self):
        a = TrainConfig.for_architecture("ARNN")
        b = TrainConfig.for_architecture("RNN")
        assert (a.batch_size, a.patience_steps, a.eval_every) == (16, 1000, 100)
        assert (b.batch_size, b.max_epochs, b.eval_every) == (1, 5, None)
        assert TrainConfig.for_architecture("RNN", batch_size=4, eval_every=None).batch_size == 4

    @pytest.mark.parametrize("kw", [dict(learning_rate=0), dict(decay_ratio=1.5), dict(batch_size=0)])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            TrainConfig(**kw)

    def test_clip(self):
        m = small_model()
        for p in m.parameters():
            p.grad = np.ones_like(p.data)
        total = clip_gradients(m.parameters(), 1.0)
        after = np.sqrt(sum(np.sum(p.grad ** 2) for p in m.parameters()))
        assert total > 1.0 and abs(after - 1.0) < 1e-12


class TestEarlyStopping:
    def test_flat_history_keeps_first_checkpoint(self):
        m = small_model()
        state = EarlyStopState()
        first = m.params["v"].data.copy()
        assert state.update(50.0, 100, m.params)
        m.params["v"].data += 1.0
        assert not state.update(50.0, 600, m.params)
        assert not state.update(50.0, 1100, m.params)
        assert state.exhausted(1100, 1000)
        assert state.best_step == 100 and np.array_equal(state.snapshot["v"], first)

    def test_train_restores_best(self, synthetic):
        m, exs = synthetic_model(synthetic[:8], "RNN", "AE")
        cfg = TrainConfig(learning_rate=0.1, batch_size=1, max_epochs=20, eval_every=2, patience_steps=6, seed=3)
        res = train(m, exs, exs[:4], cfg)
        from aspecttag.evaluation import evaluate_model
        assert evaluate_model(m, exs[:4]).f1 == res.best_f1
        assert res.stop_reason in ("patience", "max_epochs")
        assert res.steps >= res.best_step

    def test_empty_train_set(self):
        with pytest.raises(ConfigError):
            train(small_model(), [], [], TrainConfig())

    def test_seeded_runs_identical(self, synthetic):
        runs = []
        for _ in range(2):
            m, exs = synthetic_model(synthetic[:6], "LSTM", "AE", seed=4)
            res = train(m, exs, exs, TrainConfig(learning_rate=0.1, max_epochs=2, seed=4))
            runs.append(([h["train_loss"] for h in res.history], m.params["U_out"].data.copy()))
        assert runs[0][0] == runs[1][0] and np.array_equal(runs[0][1], runs[1][1])


@pytest.mark.slow
def test_arnn_loss_decreases_over_first_epochs(synthetic):
    m, exs = synthetic_model(synthetic)
    cfg = TrainConfig(learning_rate=1.0, decay_ratio=0.99, batch_size=16, max_epochs=5, seed=0)
    losses = []
    # full training-set loss at the end of every epoch (no dropout, no update noise)
    train(m, exs, exs, cfg, progress=lambda e: losses.append(float(m.loss(Tape(record=False), exs).data)))
    assert len(losses) == 5
    assert all(b < a for a, b in zip(losses, losses[1:])), losses


class TestKfold:
    def test_sizes(self):
        folds = kfold_split(list(range(100)), 5, 0.1, seed=0)
        assert [(len(f.test), len(f.validation), len(f.train)) for f in folds] == [(20, 8, 72)] * 5

    def test_partition(self):
        folds = kfold_split(list(range(53)), 5, 0.1, seed=1)
        assert sorted(x for f in folds for x in f.test) == list(range(53))
        for f in folds:
            assert not set(f.train) & set(f.test) and not set(f.validation) & set(f.test)
            assert len(f.train) + len(f.validation) + len(f.test) == 53

    def test_deterministic(self):
        a = kfold_split(list(range(30)), 3, seed=7)
        b = kfold_split(list(range(30)), 3, seed=7)
        assert [f.test for f in a] == [f.test for f in b]

    def test_k_too_large(self):
        with pytest.raises(ConfigError):
            kfold_split([1, 2, 3], 5)
