
import numpy as np
import pytest

from aspecttag.adaptation import pred_augment, weighted_folds, weighted_union
from aspecttag.corpus import EmbeddingTable, TagScheme, dumps_canonical, encode_tags
from aspecttag.models import ModelConfig, Tagger
from aspecttag.numkernel import ConfigError, Tape


def tagger(corpus, arch="RNN", mode="AE", seed=0, **kw):
    rng = np.random.default_rng(seed)
    emb = EmbeddingTable.random(sorted({t.surface for s in corpus for t in s.tokens}), 6, rng)
    return Tagger.create(ModelConfig(arch, hidden_size=5, window=1, scheme_mode=mode, embedding_dim=6, **kw), emb, rng)


def test_union_flags_source_only(synthetic):
    src, tgt = synthetic[:5], synthetic[5:12]
    out = weighted_union(src, tgt, 0.2)
    assert [s.weight for s in out] == [0.2] * 5 + [1.0] * 7
    assert [s.text for s in out] == [s.text for s in src + tgt]


def test_union_at_one_is_plain_union(synthetic):
    assert weighted_union(synthetic[:5], synthetic[5:], 1.0) == list(synthetic)


@pytest.mark.parametrize("w", [0.0, -0.1, 1.5])
def test_bad_weight(synthetic, w):
    with pytest.raises(ConfigError):
        weighted_union(synthetic[:2], synthetic[2:4], w)


def test_scheme_mismatch(synthetic):
    with pytest.raises(ConfigError):
        weighted_union(synthetic[:2], synthetic[2:4], 0.2, TagScheme("AE"), TagScheme("AESC"))


def test_fold_sizes(synthetic):
    src, tgt = synthetic[:6], synthetic[6:]
    from aspecttag.training import kfold_split
    plain = kfold_split(tgt, 3, 0.1, seed=2)
    for f, g in zip(weighted_folds(src, tgt, 3, 0.2, 0.1, seed=2), plain):
        assert len(f.train) == len(g.train) + len(src)
        assert f.test == g.test and f.validation == g.validation
        assert all(s.weight == 0.2 for s in f.train[-6:])


def test_scaled_embedding_gradient_matches_finite_differences(synthetic):
    corpus = weighted_union(synthetic[:2], synthetic[2:4], 0.2)
    m = tagger(corpus, "LSTM", seed=1)
    exs = [m.encode(s) for s in corpus]
    t = Tape()
    t.backward(m.loss(t, exs))
    E = m.params["embeddings"]
    rows = np.unique(np.concatenate([ex.ids for ex in exs]))
    for r in rows[:6]:
        for c in range(E.shape[1]):
            old = E.data[r, c]
            E.data[r, c] = old + 1e-5
            hi = float(m.loss(Tape(record=False), exs).data)
            E.data[r, c] = old - 1e-5
            lo = float(m.loss(Tape(record=False), exs).data)
            E.data[r, c] = old
            num = (hi - lo) / 2e-5
            assert abs(num - E.grad[r, c]) <= 1e-4 * max(abs(num), abs(E.grad[r, c]), 1e-6)


def test_pred_all_outside(synthetic):
    m = tagger(synthetic, "ARNN")
    # zero decoder: uniform output, argmax falls on the first label, which is O
    m.params["W_s"].data[:] = 0.0
    assert m.scheme.outside == 0
    out = pred_augment(m, synthetic[:4])
    assert all(t.pred_iob == "O" for s in out for t in s.tokens)


def test_pred_keeps_gold_and_is_deterministic(synthetic):
    m = tagger(synthetic, "BiLSTM", seed=3)
    a = pred_augment(m, synthetic)
    assert dumps_canonical(a) == dumps_canonical(pred_augment(m, synthetic))
    scheme = TagScheme("AESC")
    for s, t in zip(synthetic, a):
        assert s.spans == t.spans and s.text == t.text
        assert [x.surface for x in s.tokens] == [x.surface for x in t.tokens]
        assert encode_tags(s, scheme) == encode_tags(t, scheme)
        assert all(x.pred_iob in ("O", "B", "I") for x in t.tokens)


def test_pred_requires_ae_model(synthetic):
    with pytest.raises(ConfigError, match="AE"):
        pred_augment(tagger(synthetic, mode="AESC"), synthetic[:1])
