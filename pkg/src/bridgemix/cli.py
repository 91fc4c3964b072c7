"""Command-line entry point for the experiment harness.

Usage: ``bridgemix [CONFIG] [flags]`` where CONFIG is an optional flat
``key = value`` file and flags override its entries.  Exit codes: 0 on
success, 1 for configuration errors, 2 for data errors, 3 when every
experiment cell failed.
"""

from __future__ import annotations

import argparse
import sys

from .datasets import DataError
from .experiment import (
    ConfigError,
    ExperimentConfig,
    parse_config_file,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_ALL_FAILED = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridgemix",
        description=(
            "Compare posterior simulation parametrizations for bridge-"
            "penalized regression on a CSV dataset."
        ),
    )
    parser.add_argument("config", nargs="?", help="flat key = value config file")
    parser.add_argument("--data", help="CSV dataset path")
    parser.add_argument("--response", help="response column name")
    parser.add_argument(
        "--standardize",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="center/scale covariates and center the response",
    )
    parser.add_argument(
        "--params",
        help="comma-separated parametrizations (naive,centered,noncentered)",
    )
    parser.add_argument("--chains", type=int, help="chains per cell")
    parser.add_argument("--warmup", type=int, help="warmup iterations per chain")
    parser.add_argument("--retain", type=int, help="retained iterations per chain")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--q-list", help="comma-separated exponents in (0,2)")
    parser.add_argument("--plot-q", type=float, help="exponent for the KDE figure")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides: dict = {}
        if args.config:
            overrides.update(parse_config_file(args.config))
        if args.data is not None:
            overrides["data"] = args.data
        if args.response is not None:
            overrides["response"] = args.response
        if args.standardize is not None:
            overrides["standardize"] = args.standardize
        if args.params is not None:
            overrides["params"] = tuple(
                p.strip() for p in args.params.split(",") if p.strip()
            )
        if args.chains is not None:
            overrides["chains"] = args.chains
        if args.warmup is not None:
            overrides["warmup"] = args.warmup
        if args.retain is not None:
            overrides["retain"] = args.retain
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out"] = args.out
        if args.q_list is not None:
            overrides["q_list"] = tuple(
                float(v) for v in args.q_list.split(",") if v.strip()
            )
        if args.plot_q is not None:
            overrides["plot_q"] = args.plot_q
        if "data" not in overrides:
            raise ConfigError("no dataset given (use --data or a config file)")
        try:
            config = ExperimentConfig(**overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        report = run_experiment(config)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    print(f"sigma2_hat = {report.sigma2_hat:.6g}, tau2_hat = {report.tau2_hat:.6g}")
    print(f"summary: {report.summary_path}")
    for p in report.svg_paths:
        print(f"figure: {p}")
    if report.n_failures:
        print(f"{report.n_failures} chain(s) failed; see metadata", file=sys.stderr)
    if report.all_failed:
        print("all experiment cells failed", file=sys.stderr)
        return EXIT_ALL_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
