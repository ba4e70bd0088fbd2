import numpy as np
import pytest

from aspecttag import checkpoint
from aspecttag.corpus import TagScheme
from aspecttag.models import ARCHITECTURES, Tagger

from conftest import random_example, small_model


@pytest.mark.parametrize("arch", ARCHITECTURES)
def test_roundtrip(arch, tmp_path):
    m = small_model(arch, "AESC", features=True)
    digest = checkpoint.save(m, tmp_path / "m.ckpt", meta={"note": "x"})
    m2, meta = checkpoint.load(tmp_path / "m.ckpt")
    assert meta == {"note": "x"} and digest == checkpoint.file_hash(tmp_path / "m.ckpt")
    assert m2.config == m.config and m2.vocab == m.vocab and m2.scheme == m.scheme
    for k, p in m.params.items():
        assert np.array_equal(p.data, m2.params[k].data)
    ex = random_example(m)
    assert m.predict_labels(ex) == m2.predict_labels(ex)


def test_permuted_labels_survive(tmp_path):
    m = small_model()
    m = Tagger(m.config, m.params, m.vocab, TagScheme("AE", ["I-ASP", "B-ASP", "O"]))
    m2, _ = checkpoint.loads(checkpoint.dumps(m))
    assert m2.scheme.labels == ("I-ASP", "B-ASP", "O")


def test_bytes_stable():
    m = small_model()
    assert checkpoint.dumps(m) == checkpoint.dumps(checkpoint.loads(checkpoint.dumps(m))[0])


@pytest.mark.parametrize("mutate", [lambda b: b"XXXX" + b[4:], lambda b: b + b"\0", lambda b: b[:4] + b"\x09" + b[5:]])
def test_corrupt(mutate):
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.loads(mutate(checkpoint.dumps(small_model())))
