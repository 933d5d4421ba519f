"""Command-line front end: run experiments, fit rates, run invariant suites."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checks import run_suite
from .errors import SteinLabError
from .harness import (
    ExperimentConfig,
    emit,
    fit_rate,
    load_records,
    parse_config,
    records_to_csv,
    records_to_json,
    run_experiment,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steinlab",
        description="Normal-approximation experiments for coordinate-resampled statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the experiment described by a config file")
    run_p.add_argument("config", type=Path, help="path to an INI experiment config")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--threads", type=int, default=None, help="override the thread count")
    run_p.add_argument(
        "--format",
        choices=("csv", "json"),
        default=None,
        help="emit only this format (default: formats from the config)",
    )
    run_p.add_argument(
        "--out", type=Path, default=None, help="output path stem (default: config output path)"
    )

    rate_p = sub.add_parser("rate", help="fit a log-log convergence rate to emitted records")
    rate_p.add_argument("records", type=Path, help="path to a .csv or .json records file")

    check_p = sub.add_parser("check", help="run a named invariant suite")
    check_p.add_argument(
        "suite",
        help="suite name: core, identities, gaussian, rules, models, harness, or all",
    )
    check_p.add_argument("--seed", type=int, default=7, help="seed for the suite's sampling")

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.format is not None:
        overrides["output_formats"] = (args.format,)
    if args.out is not None:
        overrides["output_path"] = args.out
    if overrides:
        config = ExperimentConfig(
            model_kind=config.model_kind,
            model_params=config.model_params,
            n_grid=config.n_grid,
            replications=config.replications,
            seed=overrides.get("seed", config.seed),
            threads=overrides.get("threads", config.threads),
            output_formats=overrides.get("output_formats", config.output_formats),
            output_path=overrides.get("output_path", config.output_path),
            bound_options=config.bound_options,
        )

    records = run_experiment(config)
    if config.output_path is not None:
        for path in emit(records, config.output_path, config.output_formats):
            print(path)
    elif config.output_formats == ("json",):
        sys.stdout.write(records_to_json(records))
    else:
        sys.stdout.write(records_to_csv(records))
    return 0


def _cmd_rate(args: argparse.Namespace) -> int:
    records = load_records(args.records)
    fit = fit_rate(records)
    print(f"slope {fit.slope:.6f}")
    print(f"intercept {fit.intercept:.6f}")
    print(f"r_squared {fit.r_squared:.6f}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    results = run_suite(args.suite, seed=args.seed)
    failures = 0
    for res in results:
        mark = "ok" if res.passed else "FAIL"
        print(f"[{mark:>4}] {res.name}: {res.detail}")
        failures += 0 if res.passed else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "rate":
            return _cmd_rate(args)
        return _cmd_check(args)
    except (SteinLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
