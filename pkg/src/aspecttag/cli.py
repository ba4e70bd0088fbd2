"""Command-line entry point: ``aspecttag <command> ...``.

Commands: ingest, stats, train, crossval, eval, predict, adapt.

Settings resolve as built-in defaults < ``--config FILE`` (JSON) < explicit
flags, and every run directory gets a ``config.echo.json`` with the result.
Run directories live under ``$ASPECTTAG_OUTPUT_ROOT`` (default ``runs``)
and are never overwritten; a numeric suffix is added instead.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import adaptation, checkpoint
from .corpus import (CorpusError, EmbeddingTable, attach_annotations, corpus_stats, format_stats,
                     load_embeddings, parse_brat, parse_semeval_xml, read_canonical, write_canonical)
from .evaluation import conll_lines, evaluate_model, ttest_two_sided
from .models import ModelConfig, Tagger, canonical_architecture
from .numkernel import ConfigError
from .training import TrainConfig, kfold_split, train

log = logging.getLogger("aspecttag")

OUTPUT_ROOT_ENV = "ASPECTTAG_OUTPUT_ROOT"

DEFAULTS = {
    "arch": "arnn", "mode": "AE", "hidden": 100, "window": None, "keep": 1.0,
    "features": False, "pred_features": False, "embeddings": None, "embeddings_format": "word2vec-text",
    "embedding_dim": 50, "lr": None, "decay": 0.9, "epochs": None, "batch_size": None, "patience": None,
    "eval_every": None, "clip": 5.0, "seed": 0, "val_fraction": 0.1, "k": 5, "jobs": 1,
    "use_hn": False, "freeze_embeddings": False, "bidirectional": None, "src": None, "weight": 0.2,
}


class UsageError(Exception):
    pass


def unique_dir(path):
    path = Path(path)
    candidate, i = path, 0
    while candidate.exists() and any(candidate.iterdir()):
        i += 1
        candidate = path.with_name(f"{path.name}-{i}")
    candidate.mkdir(parents=True, exist_ok=True)
    return candidate


def unique_file(path):
    path = Path(path)
    candidate, i = path, 0
    while candidate.exists():
        i += 1
        candidate = path.with_name(f"{path.stem}-{i}{path.suffix}")
    return candidate


def resolve(args, keys):
    """defaults < config file < explicit flags"""
    cfg = {k: DEFAULTS.get(k) for k in keys}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config file {args.config}: {err}") from None
        unknown = set(from_file) - set(keys)
        if unknown:
            raise UsageError(f"unknown keys in {args.config}: {', '.join(sorted(unknown))}")
        cfg.update(from_file)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def run_dir(args, label):
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    return unique_dir(Path(args.out) if args.out else root / label)


def echo_config(out, command, cfg):
    with open(out / "config.echo.json", "w", encoding="utf-8") as fh:
        json.dump({"command": command, **cfg}, fh, indent=2, sort_keys=True, default=str)


# building blocks shared by train / crossval

def model_config(cfg):
    arch = canonical_architecture(cfg["arch"], cfg["bidirectional"])
    window = cfg["window"]
    if window is None:
        # baselines: window 1 bidirectional, 3 unidirectional (radius 0 / 1)
        window = 1 if arch == "ARNN" else (0 if arch.startswith("Bi") else 1)
    return ModelConfig(
        architecture=arch, hidden_size=cfg["hidden"], window=window, dropout_keep=cfg["keep"],
        use_features=cfg["features"] or cfg["pred_features"], pred_features=cfg["pred_features"],
        scheme_mode=cfg["mode"], embedding_dim=cfg["embedding_dim"],
        bidirectional=cfg["bidirectional"] if cfg["bidirectional"] is not None else True,
        use_hn=cfg["use_hn"], freeze_embeddings=cfg["freeze_embeddings"])


def train_config(cfg, arch):
    return TrainConfig.for_architecture(
        arch, learning_rate=cfg["lr"], decay_ratio=cfg["decay"], batch_size=cfg["batch_size"],
        max_epochs=cfg["epochs"], patience_steps=cfg["patience"], eval_every=cfg["eval_every"],
        clip_norm=cfg["clip"] if cfg["clip"] and cfg["clip"] > 0 else None, seed=cfg["seed"])


def build_embeddings(cfg, train_sentences, all_sentences):
    # separate stream from model initialisation, so both are reproducible on their own
    rng = np.random.default_rng([cfg["seed"], 1])
    if cfg["embeddings"]:
        path = Path(cfg["embeddings"])
        if not path.is_file():
            raise UsageError(f"embedding file not found: {path} (pass --embeddings PATH or omit it "
                             f"to use random {cfg['embedding_dim']}-d embeddings)")
        table = load_embeddings(path.read_bytes(), cfg["embeddings_format"], rng)
        words = {t.surface for s in all_sentences for t in s.tokens}
        table = table.restrict(words)
        cfg["embedding_dim"] = table.dim
        return table
    words = sorted({t.surface for s in train_sentences for t in s.tokens})
    return EmbeddingTable.random(words, cfg["embedding_dim"], rng)


def fit(cfg, train_sents, val_sents, test_sents=(), progress=None, table=None):
    if table is None:
        table = build_embeddings(cfg, train_sents, list(train_sents) + list(val_sents) + list(test_sents))
    rng = np.random.default_rng(cfg["seed"])
    mc = model_config(cfg)
    tc = train_config(cfg, mc.architecture)
    model = Tagger.create(mc, table, rng)
    train_ex = [model.encode(s) for s in train_sents]
    val_ex = [model.encode(s) for s in val_sents]
    result = train(model, train_ex, val_ex, tc, progress=progress)
    return model, result, mc, tc


def load_corpus(path):
    try:
        return read_canonical(path)
    except FileNotFoundError:
        raise UsageError(f"corpus not found: {path}") from None


# commands

def cmd_ingest(args):
    paths = [Path(p) for p in args.inputs]
    for p in paths:
        if not p.is_file():
            raise UsageError(f"input not found: {p}")
    if args.format == "semeval-xml":
        sentences = []
        for p in paths:
            try:
                sentences.extend(parse_semeval_xml(p.read_bytes()))
            except CorpusError as err:
                raise CorpusError(f"{p}: {err}") from None
    elif args.format == "brat":
        if len(paths) != 2:
            raise UsageError("brat input needs exactly two files: TEXT.txt ANNOTATIONS.ann")
        txt, ann = sorted(paths, key=lambda p: p.suffix != ".txt")
        try:
            sentences = parse_brat(txt.read_bytes(), ann.read_bytes(), doc_id=txt.stem)
        except CorpusError as err:
            raise CorpusError(f"{ann}: {err}") from None
    else:
        sentences = [s for p in paths for s in load_corpus(p)]
    if args.annotations:
        sentences = attach_annotations(sentences, Path(args.annotations).read_bytes())
    out = unique_file(args.output or paths[0].with_suffix(".jsonl"))
    write_canonical(sentences, out)
    print(f"wrote {len(sentences)} sentences to {out}")
    print(format_stats(corpus_stats(sentences)))
    return 0


def cmd_stats(args):
    sentences = [s for p in args.corpora for s in load_corpus(p)]
    stats = corpus_stats(sentences)
    print(json.dumps(stats, indent=2) if args.json else format_stats(stats))
    return 0


def _split_train_val(sentences, cfg):
    rng = np.random.default_rng(cfg["seed"])
    order = rng.permutation(len(sentences))
    n_val = int(cfg["val_fraction"] * len(sentences) + 0.5)
    return [sentences[i] for i in order[n_val:]], [sentences[i] for i in order[:n_val]]


TRAIN_KEYS = [k for k in DEFAULTS if k not in ("k", "jobs")]


def cmd_train(args):
    cfg = resolve(args, TRAIN_KEYS)
    model_config(cfg)  # validate before touching the disk
    sentences = load_corpus(args.corpus)
    if args.validation:
        train_s, val_s = sentences, load_corpus(args.validation)
    else:
        train_s, val_s = _split_train_val(sentences, cfg)
    if cfg["src"]:
        train_s = adaptation.weighted_union(load_corpus(cfg["src"]), train_s, cfg["weight"])
    table = build_embeddings(cfg, train_s, list(train_s) + list(val_s))
    out = run_dir(args, f"train-{cfg['arch']}-{cfg['mode'].lower()}")
    echo_config(out, "train", cfg)
    logf = open(out / "progress.log", "w", encoding="utf-8")

    def progress(e):
        line = (f"step={e['step']} epoch={e['epoch']} lr={e['lr']:.6g} "
                f"train_loss={e['train_loss']:.6f} val_f1={e['val_f1']:.2f}")
        logf.write(line + "\n")
        logf.flush()
        if not args.quiet:
            print(line)

    t0 = time.perf_counter()
    with logf:
        model, result, mc, tc = fit(cfg, train_s, val_s, progress=progress, table=table)
    digest = checkpoint.save(model, out / "model.ckpt", meta={"command": "train"})
    summary = result.summary(mc, tc)
    summary.update(wall_time=time.perf_counter() - t0, checkpoint_sha256=digest, config=cfg)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=str)
    print(f"best validation F1 {result.best_f1:.2f} at step {result.best_step}; run directory {out}")
    return 0


def _run_fold(job):
    cfg, i, fold = job
    cfg = dict(cfg, seed=cfg["seed"] + i)
    model, result, _, _ = fit(cfg, fold.train, fold.validation, fold.test)
    report = evaluate_model(model, [model.encode(s) for s in fold.test])
    return {"fold": i, "best_val_f1": result.best_f1, "steps": result.steps, **report.to_dict()}


def _compare(dirs):
    runs = []
    for d in dirs:
        path = Path(d) / "crossval.json"
        try:
            runs.append(json.loads(path.read_text("utf-8")))
        except OSError:
            raise UsageError(f"no crossval.json in {d}") from None
    print(f"{'metric':<10} {'A mean':>8} {'B mean':>8} {'t':>8} {'df':>7} {'p':>10}")
    rows = {}
    for metric in ("single_f1", "joint_f1"):
        a = [f[metric] for f in runs[0]["folds"]]
        b = [f[metric] for f in runs[1]["folds"]]
        r = ttest_two_sided(a, b)
        rows[metric] = {"t": r.t, "df": r.df, "p": r.p, "degenerate": r.degenerate}
        print(f"{metric:<10} {np.mean(a):>8.2f} {np.mean(b):>8.2f} {r.t:>8.3f} {r.df:>7.2f} {r.p:>10.4g}")
    return rows


def cmd_crossval(args):
    if args.compare:
        _compare(args.compare)
        return 0
    if not args.corpus:
        raise UsageError("crossval needs --corpus (or --compare RUN_A RUN_B)")
    cfg = resolve(args, list(DEFAULTS))
    model_config(cfg)
    sentences = load_corpus(args.corpus)
    if cfg["src"]:
        folds = adaptation.weighted_folds(load_corpus(cfg["src"]), sentences, cfg["k"], cfg["weight"],
                                          cfg["val_fraction"], cfg["seed"])
    else:
        folds = kfold_split(sentences, cfg["k"], cfg["val_fraction"], cfg["seed"])
    out = run_dir(args, f"crossval-{cfg['arch']}-{cfg['mode'].lower()}")
    echo_config(out, "crossval", cfg)
    jobs = [(cfg, i, f) for i, f in enumerate(folds)]
    if cfg["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            results = list(pool.map(_run_fold, jobs))
    else:
        results = [_run_fold(j) for j in jobs]
    agg = {}
    for metric in ("single_f1", "joint_f1"):
        vals = np.array([r[metric] for r in results])
        agg[metric] = {"mean": float(vals.mean()), "std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0}
    with open(out / "crossval.json", "w", encoding="utf-8") as fh:
        json.dump({"folds": results, "aggregate": agg, "config": cfg}, fh, indent=2, sort_keys=True, default=str)
    print(f"{'fold':>5} {'single':>8} {'joint':>8}")
    for r in results:
        print(f"{r['fold']:>5} {r['single_f1']:>8.2f} {r['joint_f1']:>8.2f}")
    print(f"{'mean':>5} {agg['single_f1']['mean']:>8.2f} {agg['joint_f1']['mean']:>8.2f}   "
          f"(std {agg['single_f1']['std']:.2f} / {agg['joint_f1']['std']:.2f})")
    print(f"run directory {out}")
    return 0


def _load_checkpoint(path):
    try:
        return checkpoint.load(path)[0]
    except FileNotFoundError:
        raise UsageError(f"checkpoint not found: {path}") from None


def cmd_eval(args):
    model = _load_checkpoint(args.checkpoint)
    sentences = load_corpus(args.corpus)
    report = evaluate_model(model, [model.encode(s) for s in sentences])
    print(report.table())
    if args.json_out:
        path = unique_file(args.json_out)
        path.write_text(report.to_json(), encoding="utf-8")
        print(f"wrote {path}")
    return 0


def cmd_predict(args):
    model = _load_checkpoint(args.checkpoint)
    sentences = load_corpus(args.corpus)
    blocks = []
    for s in sentences:
        ex = model.encode(s)
        gold = [model.scheme.label(i) for i in ex.labels]
        blocks.append("\n".join(conll_lines(s.words, gold, model.predict_labels(ex))))
    text = "\n\n".join(blocks) + "\n"
    if args.output:
        path = unique_file(args.output)
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_adapt(args):
    tgt = load_corpus(args.tgt)
    provenance = {"method": args.method, "tgt": str(args.tgt)}
    if args.method == "weighted":
        if not args.src:
            raise UsageError("weighted adaptation needs --src")
        out_sents = adaptation.weighted_union(load_corpus(args.src), tgt, args.weight)
        provenance.update(src=str(args.src), weight=args.weight, src_model_sha256=None)
    else:
        if not args.src_model:
            raise UsageError("pred adaptation needs --src-model CHECKPOINT")
        src_model = _load_checkpoint(args.src_model)
        out_sents = adaptation.pred_augment(src_model, tgt)
        provenance.update(src=str(args.src) if args.src else None, weight=None,
                          src_model_sha256=checkpoint.file_hash(args.src_model))
    out = unique_file(args.output)
    write_canonical(out_sents, out)
    side = out.with_name(out.stem + ".provenance.json")
    provenance["sentences"] = len(out_sents)
    side.write_text(json.dumps(provenance, indent=2, sort_keys=True), encoding="utf-8")
    print(f"wrote {out} and {side}")
    return 0


def _model_flags(p):
    p.add_argument("--config", help="JSON file with settings; flags override it")
    p.add_argument("--arch", choices=["arnn", "rnn", "jrnn", "lstm", "birnn", "bilstm"], type=str.lower)
    p.add_argument("--mode", choices=["AE", "AESC"], type=str.upper)
    p.add_argument("--bidirectional", action="store_true", default=None)
    p.add_argument("--unidirectional", dest="bidirectional", action="store_false")
    p.add_argument("--hidden", type=int)
    p.add_argument("--window", type=int, help="context window radius d (window size 2d+1)")
    p.add_argument("--keep", type=float, help="dropout keep probability")
    p.add_argument("--features", action="store_true", default=None)
    p.add_argument("--pred-features", action="store_true", default=None)
    p.add_argument("--use-hn", action="store_true", default=None,
                   help="also feed the last hidden state to the decoder (ARNN)")
    p.add_argument("--freeze-embeddings", action="store_true", default=None)
    p.add_argument("--embeddings")
    p.add_argument("--embeddings-format", choices=["word2vec-text", "glove-text"])
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--decay", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--clip", type=float, help="global gradient-norm clip; 0 disables")
    p.add_argument("--seed", type=int)
    p.add_argument("--val-fraction", type=float)
    p.add_argument("--src", help="source corpus for WEIGHTED adaptation")
    p.add_argument("--weight", type=float, help="source weight w for WEIGHTED adaptation")
    p.add_argument("--out", help="run directory (default under $%s)" % OUTPUT_ROOT_ENV)


def build_parser():
    parser = argparse.ArgumentParser(prog="aspecttag", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a corpus to canonical JSON lines")
    p.add_argument("--format", required=True, choices=["semeval-xml", "brat", "canonical"])
    p.add_argument("--annotations", help="token/POS/chunk column file to attach")
    p.add_argument("-o", "--output")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="descriptive corpus statistics")
    p.add_argument("--json", action="store_true")
    p.add_argument("corpora", nargs="+")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train one model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--validation")
    p.add_argument("--quiet", action="store_true")
    _model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("crossval", help="k-fold cross-validation, or compare two runs")
    p.add_argument("--corpus")
    p.add_argument("--k", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--compare", nargs=2, metavar=("RUN_A", "RUN_B"))
    _model_flags(p)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("eval", help="score a checkpoint on a corpus")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="token<TAB>gold<TAB>predicted output (conlleval input)")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("adapt", help="build a WEIGHTED or PRED augmented corpus")
    p.add_argument("--method", required=True, choices=["weighted", "pred"], type=str.lower)
    p.add_argument("--src")
    p.add_argument("--tgt", required=True)
    p.add_argument("--weight", type=float, default=adaptation.DEFAULT_WEIGHT)
    p.add_argument("--src-model")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_adapt)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as err:
        print(f"aspecttag {args.command}: error: {err}", file=sys.stderr)
        return 2
    except (CorpusError, OSError, ValueError, FloatingPointError) as err:
        print(f"aspecttag {args.command}: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
