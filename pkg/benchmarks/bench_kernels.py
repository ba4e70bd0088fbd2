"""Compare the compiled recurrence kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--length 40] [--hidden 100] [--repeat 5]

Reports best-of-``repeat`` wall time for each kernel (forward + backward) and
for one ARNN training step on a batch of 16 sentences.
"""

import argparse
import timeit

import numpy as np

from aspecttag import _kernels, numkernel
from aspecttag.corpus import EmbeddingTable
from aspecttag.models import Example, ModelConfig, Tagger
from aspecttag.numkernel import Tape


def kernel_cases(backend, n, h, rng):
    Zx1, U1 = rng.normal(size=(n, h)), rng.normal(size=(h, h)) / np.sqrt(h)
    Zx4, U4 = rng.normal(size=(n, 4 * h)), rng.normal(size=(4 * h, h)) / np.sqrt(h)
    dH = rng.normal(size=(n, h))

    def elman():
        H = backend.elman_forward(Zx1, U1, False)
        backend.elman_backward(U1, H, dH, False)

    def lstm():
        H, C, G = backend.lstm_forward(Zx4, U4, False)
        backend.lstm_backward(U4, H, C, G, dH, False)

    return {"elman fwd+bwd": elman, "lstm fwd+bwd": lstm}


def train_step_case(n, h, rng):
    emb = EmbeddingTable.random([f"w{i}" for i in range(500)], 50, rng)
    model = Tagger.create(ModelConfig("ARNN", hidden_size=h, window=1, scheme_mode="AESC", embedding_dim=50), emb, rng)
    batch = [Example(rng.integers(2, 502, n), rng.integers(0, 7, n), None) for _ in range(16)]

    def step():
        tape = Tape(rng=rng)
        model.zero_grad()
        tape.backward(model.loss(tape, batch))

    return step


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--length", type=int, default=40)
    ap.add_argument("--hidden", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = {"python": _kernels.python_backend}
    if _kernels.compiled_backend is not None:
        backends["cython"] = _kernels.compiled_backend
    else:
        print("compiled extension not built; timing the fallback only")

    rows = {}
    for name, backend in backends.items():
        rng = np.random.default_rng(0)
        for case, fn in kernel_cases(backend, args.length, args.hidden, rng).items():
            rows.setdefault(case, {})[name] = best(fn, args.repeat)
        saved = numkernel._recurrence
        numkernel._recurrence = backend
        try:
            step = train_step_case(args.length, args.hidden, np.random.default_rng(0))
            rows.setdefault("ARNN train step (16 x %d tok)" % args.length, {})[name] = best(step, args.repeat)
        finally:
            numkernel._recurrence = saved

    print(f"length {args.length}, hidden {args.hidden}, best of {args.repeat}")
    print(f"{'case':<32} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for case, t in rows.items():
        py, cy = t["python"] * 1e3, t.get("cython")
        if cy is None:
            print(f"{case:<32} {py:>10.2f} {'-':>10} {'-':>8}")
        else:
            print(f"{case:<32} {py:>10.2f} {cy * 1e3:>10.2f} {t['python'] / cy:>7.1f}x")


if __name__ == "__main__":
    main()
