"""Command-line entry point.

Every subcommand accepts ``--config FILE`` (a JSON object of option
values, or a manifest written by an earlier run) and explicit flags, which
win over the file. Runs that write files also write a manifest recording
the resolved options, the seed and SHA-256 digests of every input, so a
pipeline step can be repeated with ``--config that.manifest.json``.

Exit status is 0 on success, 2 for usage errors and 1 for runtime errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from typing import Dict, List, Optional

from . import __version__

log = logging.getLogger("dirlm")

# options that name input files, checked for existence before running
INPUTS = {
    "ingest": ["input", "allowlist"],
    "split": ["corpus"],
    "stats": ["corpus"],
    "coverage": ["corpus", "wordlist"],
    "similarity": ["corpus", "other"],
    "stem": ["corpus"],
    "build-tree": ["corpus"],
    "build-wordlist-tree": ["tree", "wordlist"],
    "train": ["train", "val"],
    "gridsearch": ["train", "val", "grid_file"],
    "simulate": ["targets", "wordlist", "tree", "model"],
    "sweep": ["targets", "model"],
    "report": ["results"],
}
# commands whose --out is a directory; for the rest it is a file
DIR_OUTPUT = {"split", "train", "gridsearch", "simulate", "sweep", "report"}
NOT_CONFIG = {"config", "command", "handler", "verbose", "manifest"}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers

def sha256_of(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_paths(args) -> List[str]:
    out = []
    for dest in INPUTS.get(args.command, []):
        value = getattr(args, dest, None)
        if value is None:
            continue
        out.extend(value if isinstance(value, list) else [value])
    return out


def _resolve_results(paths: List[str]) -> List[str]:
    return [os.path.join(p, "result.json") if os.path.isdir(p) else p for p in paths]


def manifest_path(args) -> Optional[str]:
    if getattr(args, "manifest", None):
        return args.manifest
    out = getattr(args, "out", None)
    if not out:
        return None
    return os.path.join(out, "manifest.json") if args.command in DIR_OUTPUT else out + ".manifest.json"


def write_manifest(args) -> Optional[str]:
    path = manifest_path(args)
    if path is None:
        return None
    inputs = _input_paths(args)
    if args.command == "report":
        inputs = _resolve_results(inputs)
    data = {
        "tool": "dirlm",
        "version": __version__,
        "command": args.command,
        "seed": args.seed,
        "config": {k: v for k, v in sorted(vars(args).items()) if k not in NOT_CONFIG},
        "inputs": {p: sha256_of(p) for p in inputs},
    }
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _prepare_output(args) -> None:
    out = getattr(args, "out", None)
    if not out:
        return
    target = out if args.command in DIR_OUTPUT else os.path.dirname(out)
    if target:
        os.makedirs(target, exist_ok=True)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _hparams(args):
    from .lm import HyperParams
    return HyperParams(max_depth=args.max_depth, min_freq=args.min_freq, embedding_size=args.embedding_size,
                       n_layers=args.layers, dropout_rate=args.dropout, learning_rate=args.lr,
                       batch_size=args.batch_size, patience=args.patience, max_epochs=args.max_epochs,
                       seed=args.seed)


def _progress(record) -> None:
    log.info("epoch %d train %.4f val %.4f", record.epoch, record.train_loss, record.val_loss)


def _wordlist_label(path: Optional[str]) -> str:
    return os.path.splitext(os.path.basename(path))[0] if path else ""


# --------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> int:
    from .dataset import generate_synthetic_corpus
    corpus = generate_synthetic_corpus(args.seed, args.sites, args.paths_per_site)
    from .synth import grammar_dict
    corpus.save(args.out)
    _write(args.out + ".grammar.json", _json(grammar_dict()))
    log.info("wrote %d sites to %s", len(corpus), args.out)
    return 0


def cmd_fetch(args) -> int:
    from .dataset import fetch_crawl_index
    if not args.live:
        raise UsageError("fetch contacts a public crawl index; pass --live to allow network access")
    n = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for domain in args.domain:
            for rec in fetch_crawl_index(domain, args.crawl_id, args.index_url, concurrency=args.concurrency):
                fh.write(rec.to_json() + "\n")
                n += 1
    log.info("wrote %d records to %s", n, args.out)
    return 0


def cmd_ingest(args) -> int:
    from .dataset import ingest_file, load_wordlist
    allow = list(load_wordlist(args.allowlist)) if args.allowlist else None
    corpus = ingest_file(args.input, allow)
    corpus.save(args.out)
    sys.stderr.write(_json(vars(corpus.report)))
    return 0


def cmd_split(args) -> int:
    from .dataset import SplitSpec, load_corpus, split_by_domain
    spec = SplitSpec(args.train_frac, args.val_frac, args.test_frac, args.seed)
    parts = split_by_domain(load_corpus(args.corpus), spec)
    os.makedirs(args.out, exist_ok=True)
    for name, part in zip(("train", "val", "test"), parts):
        part.save(os.path.join(args.out, f"{name}.ndjson"))
        log.info("%s: %d domains", name, len(part))
    return 0


def cmd_stats(args) -> int:
    from .analysis import corpus_stats
    from .dataset import load_corpus
    _emit(corpus_stats(load_corpus(args.corpus)).to_csv(), args.out)
    return 0


def cmd_coverage(args) -> int:
    from .analysis import coverage_ratio
    from .dataset import load_corpus, load_wordlist
    corpus = load_corpus(args.corpus)
    lines = ["wordlist,depth,coverage"]
    for path in args.wordlist:
        wl = load_wordlist(path)
        if args.by_depth:
            for d, r in sorted(coverage_ratio(corpus, wl, by_depth=True).items()):
                lines.append(f"{wl.name},{d},{r:.6f}")
        lines.append(f"{wl.name},all,{coverage_ratio(corpus, wl):.6f}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_similarity(args) -> int:
    from .analysis import cross_dataset_similarity, pairwise_site_similarity
    from .dataset import load_corpus
    corpus = load_corpus(args.corpus)
    if args.other:
        result = cross_dataset_similarity(corpus, load_corpus(args.other))
    else:
        mean, std = pairwise_site_similarity(corpus)
        result = {"sim_avg": mean, "sim_std": std}
    _emit(_json(result), args.out)
    return 0


def cmd_stem(args) -> int:
    from .analysis import stem_reduction
    from .dataset import load_corpus
    _emit(_json(vars(stem_reduction(load_corpus(args.corpus)))), args.out)
    return 0


def cmd_build_tree(args) -> int:
    from .dataset import load_corpus
    from .fstree import build_weighted_training_tree
    tree = build_weighted_training_tree(load_corpus(args.corpus).all_paths())
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        tree.dump(fh)
    return 0


def cmd_build_wordlist_tree(args) -> int:
    from .dataset import load_wordlist
    from .fstree import WeightedTree, build_wordlist_tree
    with open(args.tree, encoding="utf-8") as fh:
        tree = WeightedTree.load(fh)
    pruned = build_wordlist_tree(tree, load_wordlist(args.wordlist))
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        pruned.dump(fh)
    return 0


def cmd_train(args) -> int:
    from .dataset import load_corpus
    from .lm import checkpoint, fit
    model, report = fit(load_corpus(args.train), load_corpus(args.val), _hparams(args), _progress)
    os.makedirs(args.out, exist_ok=True)
    checkpoint.save(model, os.path.join(args.out, "model.ckpt"))
    _write(os.path.join(args.out, "loss.csv"), report.to_csv())
    _write(os.path.join(args.out, "report.json"), _json({
        "best_epoch": report.best_epoch, "best_val_loss": report.best_val_loss, "stop_reason": report.stop_reason,
        "hparams": report.hparams, "optimizer": report.optimizer, "vocab_size": len(model.vocab),
        "n_params": model.n_params}))
    log.info("best epoch %d, val loss %.4f", report.best_epoch, report.best_val_loss)
    return 0


def cmd_gridsearch(args) -> int:
    from .dataset import load_corpus
    from .lm import DESK_GRID, FULL_GRID, checkpoint, expand_grid, grid_search
    if args.grid_file:
        with open(args.grid_file, encoding="utf-8") as fh:
            grid = json.load(fh)
    else:
        grid = {"desk": DESK_GRID, "full": FULL_GRID}[args.grid]
    configs = expand_grid(grid, _hparams(args))
    best, results = grid_search(load_corpus(args.train), load_corpus(args.val), configs, _progress)
    os.makedirs(args.out, exist_ok=True)
    keys = list(grid)
    lines = [",".join(keys + ["best_val_loss", "best_epoch", "n_params", "selected"])]
    for r in results:
        values = [str(getattr(r.hparams, k)) for k in keys]
        values += [f"{r.report.best_val_loss:.6f}", str(r.report.best_epoch), str(r.n_params), str(int(r is best))]
        lines.append(",".join(values))
    _write(os.path.join(args.out, "grid.csv"), "\n".join(lines) + "\n")
    checkpoint.save(best.model, os.path.join(args.out, "model.ckpt"))
    _write(os.path.join(args.out, "loss.csv"), best.report.to_csv())
    return 0


def cmd_gradcheck(args) -> int:
    from .lm import gradcheck_case, gradient_check
    lines = ["seed,max_rel_error"]
    worst = 0.0
    for seed in range(args.seed, args.seed + args.seeds):
        model, batch = gradcheck_case(args.vocab_size, args.embedding_size, args.layers, seed)
        result = gradient_check(model, batch, max_entries=args.max_entries, seed=seed)
        worst = max(worst, result.max_rel_error)
        lines.append(f"{seed},{result.max_rel_error:.3e}")
    _emit("\n".join(lines) + "\n", args.out)
    if worst >= args.threshold:
        log.error("gradient check failed: %.3e >= %.1e", worst, args.threshold)
        return 1
    return 0


def _load_tree(path):
    from .fstree import WeightedTree
    with open(path, encoding="utf-8") as fh:
        return WeightedTree.load(fh)


def cmd_simulate(args) -> int:
    from .dataset import load_corpus, load_wordlist
    from .eval import evaluate
    from .fstree import build_wordlist_tree
    from .strategies import order_by_tree_weight, simulate

    targets = load_corpus(args.targets).sites
    wordlist = list(load_wordlist(args.wordlist)) if args.wordlist else None
    label = _wordlist_label(args.wordlist)
    kwargs = {}
    if args.strategy in ("breadth", "depth"):
        if wordlist is None:
            raise UsageError(f"--wordlist is required for --strategy {args.strategy}")
        kwargs["wordlist"] = wordlist
    elif args.strategy == "prob":
        if not args.tree:
            raise UsageError("--tree is required for --strategy prob")
        tree = _load_tree(args.tree)
        if wordlist is not None:
            tree = build_wordlist_tree(tree, wordlist)
            fallback = wordlist
        else:
            # no wordlist: fall back on every name the tree knows
            fallback = order_by_tree_weight(sorted(tree.segment_weights()), tree)
            label = "tree"
        kwargs.update(tree=tree, fallback=fallback)
    else:
        from .lm import checkpoint
        if not args.model:
            raise UsageError("--model is required for --strategy lm")
        kwargs.update(model=checkpoint.load(args.model), top_predicts=args.top_predicts)
        label = f"top{args.top_predicts}"

    traces = simulate(targets, args.strategy, args.budget, jobs=args.jobs, **kwargs)
    trace_dir = os.path.join(args.out, "traces")
    os.makedirs(trace_dir, exist_ok=True)
    for domain, trace in traces.items():
        _write(os.path.join(trace_dir, f"{domain}.csv"), trace.to_csv())
    result = evaluate(traces, args.strategy, label)
    _write(os.path.join(args.out, "result.json"), _json(result.to_dict()))
    log.info("%s/%s: mean successes %.2f over %d sites", args.strategy, label, result.mean, len(traces))
    return 0


def cmd_sweep(args) -> int:
    from .dataset import load_corpus
    from .eval import toppredicts_sweep, write_sweep
    from .lm import checkpoint
    sweep = toppredicts_sweep(load_corpus(args.targets).sites, checkpoint.load(args.model), args.ks, args.budget)
    write_sweep(sweep, args.out)
    for k, r in sweep.items():
        _write(os.path.join(args.out, f"result_top{k}.json"), _json(r.to_dict()))
    return 0


def cmd_report(args) -> int:
    from .eval import EvalResult, report
    results = []
    for path in _resolve_results(args.results):
        with open(path, encoding="utf-8") as fh:
            results.append(EvalResult.from_dict(json.load(fh)))
    report(results, args.out)
    return 0


# --------------------------------------------------------------------------
# parser

def _add_hparams(p: argparse.ArgumentParser) -> None:
    from .lm import HyperParams
    d = HyperParams()
    g = p.add_argument_group("model")
    g.add_argument("--max-depth", type=int, default=d.max_depth)
    g.add_argument("--min-freq", type=int, default=d.min_freq)
    g.add_argument("--embedding-size", type=int, default=d.embedding_size)
    g.add_argument("--layers", type=int, default=d.n_layers)
    g.add_argument("--dropout", type=float, default=d.dropout_rate)
    g.add_argument("--lr", type=float, default=d.learning_rate)
    g.add_argument("--batch-size", type=int, default=d.batch_size)
    g.add_argument("--patience", type=int, default=d.patience)
    g.add_argument("--max-epochs", type=int, default=d.max_epochs)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option values (flags override it)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--manifest", help="where to write the run manifest")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dirlm", description="Language-model guided directory brute-forcing.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs = {}

    def add(name, handler, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        subs[name] = p
        return p

    p = add("synth", cmd_synth, "generate a synthetic crawl corpus")
    p.add_argument("--sites", type=int, default=50)
    p.add_argument("--paths-per-site", type=int, default=200)
    p.add_argument("--out", required=True)

    p = add("fetch", cmd_fetch, "download crawl records from a public crawl index")
    p.add_argument("--domain", nargs="+", required=True)
    p.add_argument("--crawl-id", default="CC-MAIN-2023-40")
    p.add_argument("--index-url", help="index base URL (env DIRLM_INDEX_URL also works)")
    p.add_argument("--concurrency", type=int, default=1)
    p.add_argument("--live", action="store_true", help="allow network access")
    p.add_argument("--out", required=True)

    p = add("ingest", cmd_ingest, "filter and normalize crawl records into a corpus")
    p.add_argument("--input", required=True, help="NDJSON crawl records")
    p.add_argument("--allowlist", help="file of domains to keep, one per line")
    p.add_argument("--out", required=True)

    p = add("split", cmd_split, "split a corpus by domain into train/val/test")
    p.add_argument("--corpus", required=True)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--val-frac", type=float, default=0.1)
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--out", required=True)

    p = add("stats", cmd_stats, "corpus statistics as CSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")

    p = add("coverage", cmd_coverage, "share of corpus directory names found in wordlists")
    p.add_argument("--corpus", required=True)
    p.add_argument("--wordlist", nargs="+", required=True)
    p.add_argument("--by-depth", action="store_true")
    p.add_argument("--out")

    p = add("similarity", cmd_similarity, "Jaccard similarity between sites or corpora")
    p.add_argument("--corpus", required=True)
    p.add_argument("--other", help="second corpus to compare against")
    p.add_argument("--out")

    p = add("stem", cmd_stem, "Porter-stem directory names and report the reduction")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")

    p = add("build-tree", cmd_build_tree, "weighted training tree from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)

    p = add("build-wordlist-tree", cmd_build_wordlist_tree, "prune a weighted tree to a wordlist")
    p.add_argument("--tree", required=True)
    p.add_argument("--wordlist", required=True)
    p.add_argument("--out", required=True)

    p = add("train", cmd_train, "train the directory language model")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    _add_hparams(p)
    p.add_argument("--out", required=True)

    p = add("gridsearch", cmd_gridsearch, "train a hyperparameter grid and keep the best model")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--grid", choices=("desk", "full"), default="desk")
    p.add_argument("--grid-file", help="JSON object mapping hyperparameter names to value lists")
    _add_hparams(p)
    p.add_argument("--out", required=True)

    p = add("gradcheck", cmd_gradcheck, "compare analytic and numeric gradients")
    p.add_argument("--vocab-size", type=int, default=50)
    p.add_argument("--embedding-size", type=int, default=16)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--max-entries", type=int)
    p.add_argument("--threshold", type=float, default=1e-3)
    p.add_argument("--out")

    p = add("simulate", cmd_simulate, "run an attack strategy against every target site")
    p.add_argument("--targets", required=True, help="corpus of target sites")
    p.add_argument("--strategy", choices=("breadth", "depth", "prob", "lm"), required=True)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--wordlist")
    p.add_argument("--tree")
    p.add_argument("--model")
    p.add_argument("--top-predicts", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = add("sweep", cmd_sweep, "language-model attack over several topPredicts values")
    p.add_argument("--targets", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--ks", type=int, nargs="+", default=[100, 250, 500, 750, 1000, 2000, 5000, 10000])
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--out", required=True)

    p = add("report", cmd_report, "comparison tables and charts from simulate results")
    p.add_argument("--results", nargs="+", required=True, help="result.json files or simulate output dirs")
    p.add_argument("--out", required=True)

    return parser, subs


def _read_config(path: str) -> Dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config must be a JSON object")
    if "config" in data and isinstance(data["config"], dict):  # a manifest
        data = dict(data["config"], command=data.get("command"))
    return {k.replace("-", "_"): v for k, v in data.items()}


def _prescan(argv, commands):
    """Find ``--config`` and the subcommand without the full parser."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in commands), None)
    return known.config, command


def parse_args(argv):
    parser, subs = build_parser()
    config, command = _prescan(argv, subs)
    if config and command:
        sp = subs[command]
        try:
            cfg = _read_config(config)
        except (OSError, ValueError) as exc:
            sp.error(f"cannot read config {config}: {exc}")
        if cfg.get("command") not in (None, command):
            sp.error(f"config was written for '{cfg['command']}', not '{command}'")
        known = {a.dest for a in sp._actions}
        cfg = {k: v for k, v in cfg.items() if k not in NOT_CONFIG}
        unknown = sorted(set(cfg) - known)
        if unknown:
            sp.error(f"unknown option(s) in config: {', '.join(unknown)}")
        # the file supplies defaults, so explicit flags still win and
        # required options may come from the file
        for action in sp._actions:
            if action.dest in cfg:
                action.required = False
        sp.set_defaults(**cfg)
    args = parser.parse_args(argv)
    if getattr(args, "budget", 0) < 0:
        subs[args.command].error("--budget must be >= 0")
    for path in _input_paths(args):
        if not os.path.exists(path):
            subs[args.command].error(f"input file not found: {path}")
    return args


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _prepare_output(args)
        status = args.handler(args)
        if status == 0:
            write_manifest(args)
        return status
    except UsageError as exc:
        sys.stderr.write(f"dirlm {args.command}: error: {exc}\n")
        return 2
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # noqa: BLE001 - every failure becomes a diagnostic
        log.debug("traceback", exc_info=True)
        sys.stderr.write(f"dirlm {args.command}: error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
