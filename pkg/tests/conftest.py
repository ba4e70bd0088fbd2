import numpy as np
import pytest

from aspecttag.corpus import EmbeddingTable
from aspecttag.data import load_synthetic
from aspecttag.models import Example, ModelConfig, Tagger


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def synthetic():
    return load_synthetic()


def small_model(arch="ARNN", mode="AE", hidden=8, window=1, dim=4, features=False, seed=1, **kw):
    rng = np.random.default_rng(seed)
    emb = EmbeddingTable.random([f"w{i}" for i in range(6)], dim, rng)
    cfg = ModelConfig(arch, hidden_size=hidden, window=window, scheme_mode=mode, embedding_dim=dim,
                      use_features=features, **kw)
    return Tagger.create(cfg, emb, rng)


def random_example(model, n=5, seed=2):
    rng = np.random.default_rng(seed)
    L = model.config.n_labels
    feats = None
    if model.config.use_features:
        feats = rng.integers(0, 2, (n, model.config.feature_size)).astype(float)
    return Example(rng.integers(2, len(model.vocab), n), rng.integers(0, L, n), feats)


# one PASS/FAIL line per acceptance criterion at the end of the run

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        prev = _CRITERIA.get(number, (title, True))
        _CRITERIA[number] = (title, prev[1] and not failed)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}")
