"""Command-line front end: ``espm mine``, ``espm verify`` and ``espm synth``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import synth
from .dataset import DEFAULT_MISSING, BinningSpec, load_csv
from .document import build_document, make_report, render
from .errors import ConfigError, DatasetError, OracleCapExceeded
from .miner import MiningConfig, mine
from .oracle import DEFAULT_ITEM_CAP, verify
from .postprocess import finalize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_MISMATCH = 4
EXIT_CAP = 5


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, type=Path, help="CSV/TSV file with a header row")
    p.add_argument("--class-col", required=True, help="name of the label column")
    p.add_argument("--group-col", help="count supports in distinct values of this column")
    p.add_argument("--bins", help="bin numeric columns, STRATEGY:K (equal-width or equal-frequency)")
    p.add_argument("--delimiter", help="force the field delimiter (default: by file extension)")
    p.add_argument(
        "--missing", nargs="*", default=list(DEFAULT_MISSING),
        help="cell values treated as missing (default: empty and '?')",
    )


def _add_mining_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="min_support", required=True, type=float,
                   help="minimum support: per-label fraction if < 1, absolute count if >= 1")
    p.add_argument("--max-len", required=True, type=int, help="maximum pattern length")
    p.add_argument("--alpha", type=float, default=0.01, help="novelty significance level (0.01)")
    p.add_argument("--relevance-p", type=float, default=0.01,
                   help="lenient relevance p-value threshold used while mining (0.01)")
    p.add_argument("--theta-p0", type=float, default=0.05,
                   help="base p-value for the Bonferroni schedule (0.05)")
    p.add_argument("--target", nargs="+", action="extend", default=None,
                   help="target label(s); default: all labels")
    p.add_argument("--min-posterior", type=float, help="keep patterns with P(target|pattern) above this")
    p.add_argument("--relevance-backend", choices=("g2", "fisher"), default="g2")
    p.add_argument("--g2-table", choices=("full", "one-vs-rest"), default="full",
                   help="G^2 over the full label table or per target vs the rest")
    p.add_argument("--testcount-mode", choices=("prose", "pseudocode"), default="prose",
                   help="count every G^2 test (prose) or only passing ones (pseudocode)")
    p.add_argument("--strict-singletons", action="store_true",
                   help="apply the item novelty test to one-item patterns too")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="espm", description="Supervised pattern mining on tabular data.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine informative patterns")
    _add_data_args(p)
    _add_mining_args(p)
    p.add_argument("--threads", type=int, default=1, help="worker processes for the search (1)")
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--timing", action="store_true", help="embed wall-clock timings in the output")

    p = sub.add_parser("verify", help="compare the miner with the brute-force oracle")
    _add_data_args(p)
    _add_mining_args(p)
    p.add_argument("--item-cap", type=int, default=DEFAULT_ITEM_CAP,
                   help="refuse datasets with more frequent items than this")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("synth", help="write a synthetic dataset with a planted pattern")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--attributes", type=int, default=30)
    p.add_argument("--values", type=int, default=1, help="values per attribute")
    p.add_argument("--labels", type=int, default=2)
    p.add_argument("--plant", default="0,1,2", help="comma-separated attribute indices")
    p.add_argument("--posterior", type=float, default=0.9,
                   help="P(target | planted pattern)")
    p.add_argument("--base-rate", type=float, default=0.5, help="P(target) elsewhere")
    p.add_argument("--plant-rate", type=float, default=0.1,
                   help="fraction of rows forced to contain the planted pattern")
    p.add_argument("--density", type=float, default=0.3, help="probability a cell is present")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True, type=Path)
    return parser


def _config(args) -> MiningConfig:
    return MiningConfig(
        min_support=args.min_support,
        max_length=args.max_len,
        alpha=args.alpha,
        relevance_p=args.relevance_p,
        theta_p0=args.theta_p0,
        targets=tuple(args.target) if args.target else None,
        min_posterior=args.min_posterior,
        relevance_backend=args.relevance_backend,
        g2_table=args.g2_table,
        testcount_mode=args.testcount_mode,
        singleton_novelty="strict" if args.strict_singletons else "skip",
    )


def _load(args):
    try:
        binning = BinningSpec.parse(args.bins) if args.bins else None
    except DatasetError as exc:
        raise ConfigError(str(exc)) from None
    delimiter = args.delimiter
    if delimiter == "\\t":
        delimiter = "\t"
    return load_csv(
        args.input, args.class_col, group_column=args.group_col,
        binning=binning, missing=args.missing, delimiter=delimiter,
    )


def run_mine(args) -> int:
    config = _config(args)
    dataset = _load(args)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    result = mine(dataset, config, threads=args.threads)
    pattern_set = finalize(result)
    doc = build_document(dataset, result, pattern_set, timing=args.timing)
    args.output.write_text(render(doc, args.format), encoding="utf-8")
    report = make_report(dataset, result, pattern_set)
    print(
        f"{report.patterns} patterns, {report.attribute_values} attribute-values; "
        f"mining {report.mining_seconds:.2f}s + post-processing "
        f"{report.postprocess_seconds:.2f}s = {report.total_seconds:.2f}s",
        file=sys.stderr,
    )
    return EXIT_OK


def _inject_fault(result):
    counts = list(result.test_count)
    counts[0] += 1
    return replace(result, test_count=tuple(counts))


def run_verify(args) -> int:
    config = _config(args)
    dataset = _load(args)
    perturb = _inject_fault if args.inject_fault else None
    diffs = verify(dataset, config, item_cap=args.item_cap, perturb=perturb)
    if diffs:
        for d in diffs:
            print(d)
        return EXIT_MISMATCH
    print("identical")
    return EXIT_OK


def run_synth(args) -> int:
    spec = synth.SynthSpec(
        samples=args.samples,
        attributes=args.attributes,
        values=args.values,
        labels=args.labels,
        planted=synth.parse_planted(args.plant),
        posterior=args.posterior,
        base_rate=args.base_rate,
        plant_rate=args.plant_rate,
        density=args.density,
        seed=args.seed,
    )
    synth.write_csv(spec, args.output)
    items = " & ".join(f"{a}={v}" for a, v in spec.planted_items())
    print(f"wrote {args.output}; planted {items} -> {spec.target}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"mine": run_mine, "verify": run_verify, "synth": run_synth}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"espm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleCapExceeded as exc:
        print(f"espm: refusing to run the oracle: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DatasetError, OSError) as exc:
        print(f"espm: input error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
