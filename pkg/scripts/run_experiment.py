#!/usr/bin/env python
"""
Run Experiment Script - Command-line front end for the virtual experiments.

Results are printed to stdout as key=value lines; logs go to stderr.
Exit codes: 0 success, 2 config error, 3 input-data error,
4 convergence or calibration failure, 1 any other squeezelab error.
"""

import sys
import argparse
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from loguru import logger
from pydantic import ValidationError
from config.settings import settings
from squeezelab.exceptions import ConfigError, InputDataError, SqueezeLabError
from squeezelab.experiments.commands import (
    cmd_estimate,
    cmd_fit,
    cmd_simulate_run,
    cmd_spectral_fraction,
    cmd_sweep_phase,
    cmd_sweep_power,
)
from squeezelab.models.run_config import RunConfig
from squeezelab.report.keyvalue import format_key_values

# commands whose data comes from an input file rather than the run config
INPUT_COMMANDS = {"estimate", "fit"}


def setup_logging(verbose: bool = False):
    """Configure logging."""
    logger.remove()
    level = "DEBUG" if verbose else settings.log_level
    logger.add(sys.stderr, level=level, format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per experiment."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="Run-config file (section.key=value)")
    common.add_argument("--seed", type=int, default=None, help="Override run.seed")
    common.add_argument("--out-dir", type=str, default=None, help="Output directory")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (results do not depend on it)")
    common.add_argument("-v", "--verbose", action="store_true", help="Verbose output")

    parser = argparse.ArgumentParser(
        description="squeezelab - Polarization-squeezed vacuum virtual experiments"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sweep_phase = commands.add_parser("sweep-phase", parents=[common], help="NRF of S2/S3 against plate tilt")
    sweep_phase.add_argument("--alpha-start", type=float, default=-30.0, help="First tilt, degrees")
    sweep_phase.add_argument("--alpha-stop", type=float, default=30.0, help="Last tilt, degrees")
    sweep_phase.add_argument("--steps", type=int, default=61)
    sweep_phase.add_argument("--spectral-mixture", action="store_true", help="Mode-group phases from the crystal spectrum")

    sweep_power = commands.add_parser("sweep-power", parents=[common], help="Photons per pulse against pump power")
    sweep_power.add_argument("--power-stop", type=float, default=120.0, help="Largest pump power, mW")
    sweep_power.add_argument("--steps", type=int, default=13)
    sweep_power.add_argument("--sampled", action="store_true", help="Add sampled mean photon numbers")

    spectral = commands.add_parser("spectral-fraction", parents=[common], help="Squeezed fraction of the spectrum")
    spectral.add_argument("--alignment", choices=["degenerate", "nondegenerate"], default=None)

    simulate = commands.add_parser("simulate-run", parents=[common], help="Write raw pulse records")
    simulate.add_argument("--spectral-mixture", action="store_true", help="Mode-group phases from the crystal spectrum")

    estimate = commands.add_parser("estimate", parents=[common], help="Estimate the NRF of a records file")
    estimate.add_argument("records", type=str, help="Pulse-record CSV")

    fit = commands.add_parser("fit", parents=[common], help="Fit a points CSV (x,y[,weight])")
    fit.add_argument("points", type=str, help="Points CSV")
    fit.add_argument("--model", choices=["gain", "nrf"], required=True)
    fit.add_argument("--stokes-index", type=int, choices=[2, 3], default=None)

    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """Run config from --config, or the built-in defaults."""
    return RunConfig.from_file(args.config) if args.config else RunConfig()


def as_squeezelab_error(command: str, error: ValueError) -> SqueezeLabError:
    """Map a validation error that escaped a command to the CLI error of its input."""
    if command in INPUT_COMMANDS:
        return InputDataError(f"invalid input data: {error}")
    return ConfigError(f"invalid parameters: {error}")


def dispatch(args: argparse.Namespace) -> dict:
    """Run the selected command and return its result block."""
    config = load_config(args)
    common = {"out_dir": args.out_dir}
    seeded = {"seed": args.seed, "threads": args.threads, **common}

    if args.command == "sweep-phase":
        return cmd_sweep_phase(
            config, args.alpha_start, args.alpha_stop, args.steps,
            use_spectrum=args.spectral_mixture, **seeded
        )
    if args.command == "sweep-power":
        return cmd_sweep_power(config, args.power_stop, args.steps, sampled=args.sampled, **seeded)
    if args.command == "spectral-fraction":
        return cmd_spectral_fraction(config, args.alignment, **common)
    if args.command == "simulate-run":
        return cmd_simulate_run(config, use_spectrum=args.spectral_mixture, **seeded)
    if args.command == "estimate":
        return cmd_estimate(args.records, config, **seeded)
    return cmd_fit(args.points, args.model, config, args.stokes_index, **common)


def main(argv: list[str] = None) -> int:
    """Parse arguments, run one command and print its result block."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    logger.info("=" * 60)
    logger.info(f"squeezelab - {args.command}")
    logger.info("=" * 60)

    try:
        result = dispatch(args)
    except SqueezeLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except (ValidationError, ValueError) as e:
        error = as_squeezelab_error(args.command, e)
        logger.error(f"{type(error).__name__}: {error}")
        return error.exit_code

    sys.stdout.write(format_key_values(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
