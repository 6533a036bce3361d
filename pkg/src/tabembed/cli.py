"""Command-line entry point: ``tabembed <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from tabembed.bench import CONFIG_HELP, encode, load_config, prepare, read_records, report, run, summarize
from tabembed.dataset import SplitSpec, dataset_names, fetch_dataset
from tabembed.dataset.fetch import CACHE_ENV, OFFLINE_ENV
from tabembed.discretizer import DiscretizerConfig
from tabembed.encoders import KINDS
from tabembed.errors import TabEmbedError
from tabembed.models import build_model, fit

log = logging.getLogger("tabembed")

ENV_HELP = f"""\
environment:
  {CACHE_ENV}   dataset cache directory (default ~/.cache/tabembed)
  {OFFLINE_ENV}     set to 1 to use only cached datasets
  TABEMBED_WORKERS      parallel training processes for `run` (default 1)
"""


def _prep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("dataset", choices=dataset_names())
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--split-seed", type=int, default=0, help="seed of the stratified 70/15/15 split")
    p.add_argument("--max-depth", type=int, default=7, help="largest tree depth searched by the discretizer")
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds for depth and pruning choice")


def _prepare(args):
    return prepare(
        args.dataset, SplitSpec(seed=args.split_seed), DiscretizerConfig(args.max_depth, args.folds, args.split_seed),
        args.cache_dir,
    )


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="tabembed",
        description="Categorical encoders with entity and context embeddings on tabular benchmarks.",
        epilog=ENV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--cache-dir", type=Path, default=None, help=f"dataset cache (overrides {CACHE_ENV})")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="(default: INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download and cache datasets", formatter_class=fmt)
    p.add_argument("dataset", choices=dataset_names() + ["all"])

    p = sub.add_parser("discretize", help="split a dataset and bin its continuous columns", formatter_class=fmt)
    _prep_args(p)

    p = sub.add_parser("encode", help="discretize, then encode every split", formatter_class=fmt)
    _prep_args(p)
    p.add_argument("--encoder", choices=KINDS, default="ordinal", help="encoder kind")

    p = sub.add_parser("train", help="train one model on one encoded dataset", formatter_class=fmt)
    _prep_args(p)
    p.add_argument("--encoder", choices=KINDS, default="ordinal", help="encoder kind")
    p.add_argument("--model", choices=["entity", "context"], default="entity", help="model kind")
    p.add_argument("--seed", type=int, default=0, help="initialization, dropout and shuffling seed")

    p = sub.add_parser(
        "run", help="run the benchmark grid from a config file", epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--workers", type=int, default=None, help="training processes (default: TABEMBED_WORKERS or 1)")

    p = sub.add_parser("report", help="summarize records.jsonl in a run directory", formatter_class=fmt)
    p.add_argument("directory", type=Path)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except TabEmbedError as exc:
        log.error("%s", exc)
        return 2


def _dispatch(args) -> int:
    if args.command == "fetch":
        names = dataset_names() if args.dataset == "all" else [args.dataset]
        failures = 0
        for name in names:
            try:
                path = fetch_dataset(name, args.cache_dir)
                print(f"{name}: {path}")
            except TabEmbedError as exc:
                failures += 1
                print(f"{name}: FAILED {exc}", file=sys.stderr)
        return 1 if failures else 0

    if args.command == "discretize":
        prepared = _prepare(args)
        target = args.out / args.dataset
        prepared.save(target)
        for name, b in prepared.bins.items():
            print(f"{name}: {b.n_bins} bins, alpha={b.chosen_alpha:.4g}{' (degenerate)' if b.degenerate else ''}")
        print(f"wrote {target}")
        return 0

    if args.command == "encode":
        prepared = _prepare(args)
        splits = encode(prepared, args.encoder)
        target = args.out / args.dataset / args.encoder
        target.mkdir(parents=True, exist_ok=True)
        for name in ("train", "validation", "test"):
            getattr(splits, name).save(target / f"{name}.csv")
        splits.save_encoders(target / "encoders.json")
        print(f"{splits.train.values.shape[1]} encoded columns; wrote {target}")
        return 0

    if args.command == "train":
        prepared = _prepare(args)
        splits = encode(prepared, args.encoder)
        model = build_model(args.model, splits.train, seed=args.seed)
        result = fit(model, splits, seed=args.seed)
        target = args.out / args.dataset / args.encoder
        target.mkdir(parents=True, exist_ok=True)
        result.save(target / f"{args.model}_seed{args.seed}.json")
        f1 = "undefined" if result.test_f1 is None else f"{result.test_f1:.4f}"
        print(json.dumps({"f1": f1, "bce": round(result.test_bce, 6), "train_seconds": round(result.train_seconds, 3)}))
        return 0

    if args.command == "run":
        config = load_config(args.config)
        records = run(config, workers=args.workers, cache_dir=args.cache_dir)
        report(summarize(records), config.output_dir)
        failed = sum(r.status != "ok" for r in records)
        print(f"{len(records)} records ({failed} failed) in {config.output_dir}")
        return 0

    if args.command == "report":
        records = read_records(args.directory)
        if not records:
            log.error("no records in %s", args.directory)
            return 2
        report(summarize(records), args.directory)
        print((args.directory / "tables.txt").read_text(encoding="utf-8"))
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
