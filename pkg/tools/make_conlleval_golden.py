"""Freeze reference conlleval scores for seeded random tagging instances.

Runs the Python port of the conlleval script found in examples/ on token-per-line
input and stores the overall precision/recall/FB1 exactly as the script prints
them (``%6.2f``). Usage::

    python3 tools/make_conlleval_golden.py [PATH_TO_PORT] > tests/data/conlleval_golden.json
"""

import importlib.util
import io
import json
import random
import sys
from pathlib import Path

PORT = Path(__file__).resolve().parents[1] / "examples/conlleval_chunking_f1_evaluation_reimplementatio/r009__spyysalo__conlleval.py__conlleval.py"
SCHEMES = {
    "AE": ["O", "B-ASP", "I-ASP"],
    "AESC": ["O", "B-ASP+", "I-ASP+", "B-ASP-", "I-ASP-", "B-ASP0", "I-ASP0"],
}


def load_port(path):
    spec = importlib.util.spec_from_file_location("conlleval_port", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def overall(port, lines):
    c = port.evaluate(io.StringIO("\n".join(lines) + "\n"))
    # same arithmetic as the script's report(); recall is 0 when there is no gold phrase
    precision = 100.0 * c.correct_chunk / c.found_guessed if c.found_guessed else 0.0
    recall = 100.0 * c.correct_chunk / c.found_correct if c.found_correct else 0.0
    fb1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {k: float("%6.2f" % v) for k, v in (("precision", precision), ("recall", recall), ("f1", fb1))}


def instance(rng, labels):
    gold, pred = [], []
    for _ in range(rng.randint(1, 5)):
        n = rng.randint(1, 15)
        g = [rng.choice(labels) if rng.random() < 0.4 else "O" for _ in range(n)]
        p = [x if rng.random() < 0.7 else rng.choice(labels) for x in g]
        gold.append(g)
        pred.append(p)
    return gold, pred


def main(argv):
    port = load_port(argv[1] if len(argv) > 1 else PORT)
    rng = random.Random(20240607)
    out = {}
    for mode, labels in SCHEMES.items():
        cases = []
        for _ in range(50):
            gold, pred = instance(rng, labels)
            lines = []
            for g, p in zip(gold, pred):
                lines += [f"w{i} {a} {b}" for i, (a, b) in enumerate(zip(g, p))] + [""]
            cases.append({"gold": gold, "pred": pred, **overall(port, lines)})
        out[mode] = cases
    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv)
