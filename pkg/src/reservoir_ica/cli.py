"""Command-line entry point: reoica-bench."""

import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from reservoir_ica.errors import ConfigurationError
from reservoir_ica.experiments.config import (
    build_spec,
    load_config,
    parse_seeds,
    parse_sweep,
    split_list,
)
from reservoir_ica.experiments.presets import PRESETS, get_preset
from reservoir_ica.experiments.runner import run_experiment, summarize

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reoica-bench",
        description="Run reservoir-expanded online ICA benchmarks and write CSV results.",
    )
    parser.add_argument("--config", type=str, help="Path to a key=value config file.")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="Named experiment preset.")
    parser.add_argument("--regime", type=str, help="Comma-separated regimes.")
    parser.add_argument("--method", type=str, help="Comma-separated methods.")
    parser.add_argument("--seeds", type=str, help="Seed list, e.g. 0,1,2 or 0-9.")
    parser.add_argument("--T", type=int, dest="T", help="Samples per run.")
    parser.add_argument("--sweep", type=str, help="Sweep grid, e.g. 'N=100|250;eps=0.1|0.8'.")
    parser.add_argument("--out", type=str, help="Output directory for CSV files.")
    parser.add_argument("--jobs", type=int, help="Parallel worker processes.")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity (default: INFO).",
    )
    return parser


def cli_values(args: argparse.Namespace) -> dict:
    """Flag values that were actually given, as ExperimentSpec kwargs."""
    values: dict = {}
    if args.regime:
        values["regimes"] = split_list(args.regime)
    if args.method:
        values["methods"] = split_list(args.method)
    if args.seeds:
        values["seeds"] = parse_seeds(args.seeds)
    if args.T is not None:
        values["T"] = args.T
    if args.sweep:
        values["sweep"] = parse_sweep(args.sweep)
    if args.out:
        values["output_dir"] = Path(args.out)
    if args.jobs is not None:
        values["jobs"] = args.jobs
    return values


def main(argv: list[str] | None = None) -> int:
    """
    Run an experiment from flags, a config file and/or a preset.

    Returns:
        0 if every run succeeded, 1 if any run failed, 2 on invalid configuration
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)

    try:
        preset = get_preset(args.preset) if args.preset else None
        file_values = load_config(args.config) if args.config else None
        spec = build_spec(preset, file_values, cli_values(args))
    except (ConfigurationError, FileNotFoundError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return 2

    result = run_experiment(spec)

    with pd.option_context("display.width", 160, "display.max_columns", 20):
        print(summarize(result.aggregate).to_string(index=False))

    return 1 if result.failed else 0


if __name__ == "__main__":
    sys.exit(main())
