"""
Command-line interface.

Subcommands::

    fourphoton simulate --config run.json [--out table.csv]
    fourphoton sample table.csv --counts 1000 --seed 7 [--out noisy.csv]
    fourphoton fit noisy.csv --model fringe [--weighted] [--free-phase] [--out fit.json]
    fourphoton balance --config run.json [--out balance.json]
    fourphoton report [--out summary.json] [--tolerance NAME=VALUE ...]

Exit codes: 0 on success, 1 for bad input or configuration, 2 for numerical
failures, non-converged fits, unbalanced searches and failing checks.
"""

import argparse
import logging
import sys
import warnings
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from . import __version__
from .config import load_run_config
from .errors import ConfigError, NumericalFailure
from .fitkit import balance_theta1, fit
from .report import run_acceptance
from .scan import ScanTable, poissonize, run_scan
from .tableio import format_json, format_table, read_table, write_json, write_table
from .types import FitModelKind

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2


def _emit_table(table: ScanTable, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(format_table(table))
    else:
        write_table(table, out)
        logger.info("Wrote %s", out)


def _emit_json(payload: dict[str, Any], out: Path | None) -> None:
    if out is None:
        sys.stdout.write(format_json(payload))
    else:
        write_json(payload, out)
        logger.info("Wrote %s", out)


def _parse_seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"seed must be an integer, got {text!r}"
        ) from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(
            f"seed must fit in 64 unsigned bits, got {seed}"
        )
    return seed


def _parse_tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"tolerance must be a number, got {value!r}"
        ) from None


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run the configured scan and write its table."""
    cfg = load_run_config(args.config)
    table = run_scan(cfg.require_scan(), cfg.parallel)
    if cfg.mean_counts_at_max is not None:
        table = poissonize(table, cfg.mean_counts_at_max, cfg.seed or 0)
    _emit_table(table, args.out or cfg.table_path)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    """Append Poisson counts to a table."""
    table = read_table(args.table)
    _emit_table(poissonize(table, args.counts, args.seed), args.out)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    """Fit a model to a table and write the report."""
    model = FitModelKind.from_string(args.model) if args.model else None
    weighted, free_phase, out = args.weighted, args.free_phase, args.out
    if args.config is not None:
        cfg = load_run_config(args.config)
        model = model or cfg.fit_model
        weighted = weighted or cfg.weighted
        free_phase = free_phase or cfg.free_phase
        out = out or cfg.report_path
    if model is None:
        raise ConfigError("fit needs --model or a fit.model entry in --config")

    table = read_table(args.data)
    report = fit(table, model, weighted=weighted, free_phase=free_phase)
    _emit_json(report.to_dict(), out)
    if not report.converged:
        logger.error("Fit did not converge: %s", report.message)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_balance(args: argparse.Namespace) -> int:
    """Search the HWP1 angle that removes the cos 2phi fringe term."""
    cfg = load_run_config(args.config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = balance_theta1(
            cfg.source.schmidt_spec(), cfg.balance_tolerance, cfg.parallel
        )
    _emit_json(result.to_dict(), args.out or cfg.report_path)
    if not result.balanced:
        logger.error(
            "Balance not reached: |V2|=%.3g > %g", abs(result.v2), result.tolerance
        )
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Run the acceptance suite and print the pass/fail table."""
    report = run_acceptance(dict(args.tolerance or []))
    sys.stdout.write(report.format_text())
    if args.out is not None:
        write_json(report.to_dict(), args.out)
        logger.info("Wrote %s", args.out)
    return EXIT_OK if report.all_passed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="fourphoton",
        description="Four-photon interference simulator and fitting toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log at DEBUG level"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Simulate a configured scan")
    simulate.add_argument("--config", type=Path, required=True, help="JSON run config")
    simulate.add_argument("--out", type=Path, help="Output CSV (default: config)")
    simulate.set_defaults(handler=cmd_simulate)

    sample = commands.add_parser("sample", help="Add Poisson counts to a table")
    sample.add_argument("table", type=Path, help="Input CSV table")
    sample.add_argument(
        "--counts", type=float, required=True, help="Mean counts at the curve maximum"
    )
    sample.add_argument("--seed", type=_parse_seed, required=True, help="Random seed")
    sample.add_argument("--out", type=Path, help="Output CSV (default: stdout)")
    sample.set_defaults(handler=cmd_sample)

    fit_cmd = commands.add_parser("fit", help="Fit a model to a table")
    fit_cmd.add_argument("data", type=Path, help="Input CSV table")
    fit_cmd.add_argument(
        "--model",
        choices=[kind.value for kind in FitModelKind],
        help="Model to fit (default: fit.model from --config)",
    )
    fit_cmd.add_argument("--config", type=Path, help="JSON run config with fit options")
    fit_cmd.add_argument(
        "--weighted", action="store_true", help="Poisson-weighted residuals"
    )
    fit_cmd.add_argument(
        "--free-phase", action="store_true", help="Fit the fringe phase origin"
    )
    fit_cmd.add_argument("--out", type=Path, help="Output JSON (default: stdout)")
    fit_cmd.set_defaults(handler=cmd_fit)

    balance = commands.add_parser("balance", help="Balance HWP1 for a source")
    balance.add_argument("--config", type=Path, required=True, help="JSON run config")
    balance.add_argument("--out", type=Path, help="Output JSON (default: config)")
    balance.set_defaults(handler=cmd_balance)

    report = commands.add_parser("report", help="Run the acceptance suite")
    report.add_argument("--out", type=Path, help="JSON summary path")
    report.add_argument(
        "--tolerance",
        type=_parse_tolerance,
        action="append",
        metavar="NAME=VALUE",
        help="Override one check's tolerance (repeatable)",
    )
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the command line.

    Parameters
    ----------
    argv : Sequence[str] | None, optional
        Arguments without the program name, ``sys.argv[1:]`` when omitted

    Returns
    -------
    int
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return int(args.handler(args))
    except (NumericalFailure, ArithmeticError) as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except ConfigError as e:
        logger.error("Invalid input: %s", e)
        return EXIT_INPUT
    except (ValueError, OSError) as e:
        logger.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
