"""
Command line front end: run, sweep-distance and plot.
"""

import argparse
import logging
from typing import List, Optional

from .config import load_config
from .errors import ConfigurationError, PlotParseError
from .harness import emit_plot_script, run, sweep_distance

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURES = 3

# parser arguments in the following format
# Long flag, short flag, help, required, type
run_args = [
    ("--config", "-c", "Experiment TOML file with a [setup] table", True, str),
    ("--trials", "-n", "Trials per grid point, overrides the config", False, int),
    ("--seed", "-s", "Master seed, overrides the config", False, int),
    ("--out", "-o", "Output directory, overrides the config", False, str),
    ("--workers", "-w", "Worker processes, overrides the config", False, int),
]
# Long flag, help
run_flags = [
    ("--emit-plots", "Write a gnuplot script next to the results"),
    ("--crlb-only", "Only evaluate the bounds, skip estimation"),
    ("--trace-solver", "Dump the ADMM iteration trace of every solve"),
    ("--verbose", "Debug logging"),
]


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    for long_arg, short_arg, help_text, required, kind in run_args:
        parser.add_argument(long_arg, short_arg, help=help_text, required=required, type=kind)
    for long_arg, help_text in run_flags:
        parser.add_argument(long_arg, action="store_true", help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ris-anm-sim", description="hybrid RIS two stage ANM channel estimation simulator")
    commands = parser.add_subparsers(dest="command", required=True)
    _add_run_arguments(commands.add_parser("run", help="power sweep over the configured grid"))
    _add_run_arguments(commands.add_parser("sweep-distance", help="fixed power, RIS-MS distance sweep"))
    plot = commands.add_parser("plot", help="gnuplot script from a results CSV")
    plot.add_argument("csv", help="results CSV")
    plot.add_argument("--output", "-o", help="script path, defaults to the CSV name with .gp")
    plot.add_argument("--verbose", action="store_true", help="Debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point, returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "plot":
        try:
            emit_plot_script(args.csv, args.output)
        except PlotParseError as e:
            logging.error(f"Cannot plot {args.csv}: {e}")
            return EXIT_CONFIG
        return EXIT_OK

    try:
        config = load_config(args.config, distance=args.command == "sweep-distance").replace(trials=args.trials, seed=args.seed, workers=args.workers)
    except ConfigurationError as e:
        logging.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    out_dir = args.out or config.output
    driver = sweep_distance if args.command == "sweep-distance" else run
    try:
        summary = driver(config, out_dir, crlb_only=args.crlb_only, trace_solver=args.trace_solver, emit_plots=args.emit_plots)
    except ConfigurationError as e:
        logging.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    return EXIT_FAILURES if summary.failures else EXIT_OK
