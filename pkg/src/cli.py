"""Command-line entry point: ``topdp run``, ``topdp sweep``, ``topdp calibrate``."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import fields
from pathlib import Path
from typing import Any

from .experiment import run_experiment
from .privacy.budget import PrivacyBudget, calibrate_sigma0
from .sweep import SWEEP_AXES, SweepProgress, SweepRunner, parse_axis_values
from .utils.config import ExperimentConfig, parse_config, setup_logging
from .utils.exceptions import TopDPError

logger = logging.getLogger(__name__)

CONFIG_KEYS = [f.name for f in fields(ExperimentConfig)]


def _create_argument_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog="topdp",
        description="Simulate differentially private decentralized learning",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one experiment")
    _add_config_arguments(run)

    sweep = commands.add_parser("sweep", help="Run one experiment per value of an axis")
    sweep.add_argument("--axis", required=True, choices=SWEEP_AXES, help="Config key to vary")
    sweep.add_argument(
        "--values", required=True, help="Comma-separated values, e.g. 0.75,0.5,0.25"
    )
    sweep.add_argument("--progress", action="store_true", help="Print progress per finished run")
    _add_config_arguments(sweep)

    calibrate = commands.add_parser("calibrate", help="Print the calibrated sigma0")
    _add_calibrate_arguments(calibrate)
    return parser


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Add ``--config`` and one override flag per config key."""
    parser.add_argument("--config", type=Path, help="Flat YAML config file")
    group = parser.add_argument_group("config overrides")
    for key in CONFIG_KEYS:
        flags = [f"--{key}"]
        if "_" in key:
            flags.insert(0, f"--{key.replace('_', '-')}")
        group.add_argument(*flags, dest=key, default=None, metavar="VALUE")


def _add_calibrate_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, required=True)
    parser.add_argument("--delta", type=float, required=True)
    parser.add_argument("--iterations", type=int, required=True)
    parser.add_argument("--dataset-size", type=int, required=True)


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {key: getattr(args, key) for key in CONFIG_KEYS if getattr(args, key) is not None}


def _run(args: argparse.Namespace) -> int:
    config = parse_config(args.config, _overrides(args))
    setup_logging(config)
    result = run_experiment(config)
    final = result.metrics[-1]
    print(
        f"{config.run_name}: iteration {final.iteration} mean accuracy "
        f"{final.mean_accuracy:.4f} std {final.std_accuracy:.4f} "
        f"max epsilon {final.max_spent_epsilon:.4f} -> {result.trace_path}"
    )
    return 0


def _print_progress(progress: SweepProgress) -> None:
    done = progress.completed_runs + progress.failed_runs
    print(f"Progress: {done}/{progress.total_runs} runs ({progress.failed_runs} failed)")


def _sweep(args: argparse.Namespace) -> int:
    template = parse_config(args.config, _overrides(args))
    setup_logging(template)
    runner = SweepRunner(
        template,
        args.axis,
        parse_axis_values(args.values),
        progress_callback=_print_progress if args.progress else None,
    )
    result = runner.run()
    for run in result.runs:
        if run.result is not None:
            print(f"{args.axis}={run.value}: mean accuracy {run.result.final_mean_accuracy:.4f}")
        else:
            print(f"{args.axis}={run.value}: FAILED {run.error}")
    if result.combined_path is not None:
        print(f"Combined trace: {result.combined_path}")
    return 0 if result.succeeded else 1


def _calibrate(args: argparse.Namespace) -> int:
    budget = PrivacyBudget(args.epsilon, args.delta)
    print(repr(calibrate_sigma0(budget, args.iterations, args.dataset_size)))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for command-line usage; returns the exit code."""
    parser = _create_argument_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _run, "sweep": _sweep, "calibrate": _calibrate}
    try:
        return handlers[args.command](args)
    except TopDPError as e:
        logger.error(f"{args.command} failed [{e.error_code}]: {e.message}")
        print(f"Error [{e.error_code}]: {e.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
