import argparse
import logging
import pkgutil
import sys
from pathlib import Path

import cqed_teleport.experiments
import cqed_teleport.runner as run
from cqed_teleport._enums import OutputFormat
from cqed_teleport.exceptions import (
    ResultWriteError,
    ScenarioConfigError,
    TeleportError,
)
from cqed_teleport.read_file import load_config
from cqed_teleport.scenario import ScenarioConfig
from cqed_teleport.write_file import emit_results

logger = logging.getLogger("cqed_teleport")

EXIT_CONFIG_ERROR = 2
EXIT_RUN_ERROR = 3
EXIT_WRITE_ERROR = 4


def discover_experiments() -> list[str]:
    return sorted(
        name.replace("_", "-")
        for _, name, is_package in pkgutil.iter_modules(
            cqed_teleport.experiments.__path__
        )
        if is_package
    )


def configure_logger(args: argparse.Namespace) -> None:
    """Sets up logger with verbose and log file options."""
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if args.log_file:
        handlers.append(logging.FileHandler(args.log_file))
    logging.basicConfig(
        format="%(asctime)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=handlers,
    )
    logger.setLevel(getattr(logging, args.level))


class StoreLogFile(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None) -> None:
        if getattr(namespace, "level", "WARNING") == "WARNING":
            raise argparse.ArgumentError(
                self,
                "Verbosity level must be set before the log file "
                "(e.g., --verbose, --very-verbose, -v, -vv).",
            )
        setattr(namespace, self.dest, values)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config",
        metavar="<scenario.json>",
        help="Scenario file; built-in defaults are used without one",
        type=Path,
    )
    common.add_argument(
        "--seed",
        help="Seed of the first trial, trial i uses seed + i",
        type=int,
    )
    common.add_argument("--trials", help="Number of trials", type=int)
    common.add_argument(
        "-o",
        "--output",
        metavar="<results.csv>",
        help="Results file, defaults to stdout",
        type=Path,
    )
    common.add_argument(
        "-f",
        "--format",
        help="Results format",
        choices=[str(fmt) for fmt in OutputFormat],
        dest="output_format",
    )

    verbosity = common.add_argument_group(title="Logging options")
    verbosity_args = verbosity.add_mutually_exclusive_group()
    verbosity_args.add_argument(
        "-v",
        "--verbose",
        help="Set verbose logging",
        action="store_const",
        const="INFO",
        dest="level",
    )
    verbosity_args.add_argument(
        "-vv",
        "--very-verbose",
        help="Set debug logging",
        action="store_const",
        const="DEBUG",
        dest="level",
    )
    verbosity.add_argument(
        "-l",
        "--logfile",
        metavar="<filename.log>",
        help="Also log to a file. Logging must be set to verbose or very verbose",
        dest="log_file",
        action=StoreLogFile,
        type=Path,
    )
    common.set_defaults(level="WARNING", log_file=None)
    return common


def create_parser(argv: list[str] | None = None) -> argparse.Namespace:
    """Create an argument parser for the command line interface."""
    experiments = discover_experiments()
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="cqed-teleport",
        description=(
            "Simulates teleportation between two charge qubits coupled "
            "through a microwave resonator"
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for experiment in experiments:
        commands.add_parser(
            experiment, parents=[common], help=f"Run the {experiment} experiment"
        )
    sweep = commands.add_parser(
        "sweep",
        parents=[common],
        help="Run an experiment over the values of the scenario's sweep section",
    )
    sweep.add_argument("experiment", choices=experiments)
    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    """
    The scenario from ``--config`` or the defaults, with command-line
    overrides applied.

    Raises:
        ScenarioConfigError: If the file or an override is invalid.
    """
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    try:
        return cfg.with_overrides(
            protocol__seed=args.seed,
            protocol__trials=args.trials,
            output__path=str(args.output) if args.output else None,
            output__format=args.output_format,
        )
    except ValueError as e:
        raise ScenarioConfigError(f"Invalid command-line override: {e}") from e


def main(argv: list[str] | None = None) -> None:
    args = create_parser(argv)

    configure_logger(args)

    experiment = args.experiment if args.command == "sweep" else args.command
    try:
        cfg = build_config(args)
        if args.command == "sweep" and cfg.sweep is None:
            raise ScenarioConfigError(
                f"Scenario '{cfg.name}' has no sweep section to run"
            )
        if args.command != "sweep" and cfg.sweep is not None:
            cfg = cfg.model_copy(update={"sweep": None})
        results = run.run_scenario(cfg, experiment)
        emit_results(
            results,
            cfg.output.format,
            cfg.output.path,
            cfg.output.snapshot_series,
        )
    except ScenarioConfigError as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(EXIT_CONFIG_ERROR)
    except ResultWriteError as e:
        logger.error(str(e))
        sys.exit(EXIT_WRITE_ERROR)
    except TeleportError as e:
        logger.error(str(e))
        sys.exit(EXIT_RUN_ERROR)


if __name__ == "__main__":
    main()
