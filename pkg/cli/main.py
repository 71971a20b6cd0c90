"""Command-line entry point of the wave scattering toolkit."""
import argparse
import sys
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import structlog

from cli.config.models import RunConfig
from cli.config.parse import build_config
from cli.config.parse import load_defaults
from cli.config.parse import load_mapping
from cli.import_commands import Runner
from cli.import_commands import import_commands
from lib.cli.init_presets import init_presets
from lib.cli.init_presets import resolve_preset
from lib.cli.middlewares import create_context
from lib.core.errors import ConfigError
from lib.core.errors import ConfigIssue
from lib.core.errors import WaveToolkitError
from lib.core.logger import initialize_logger
from lib.core.text_processor import parse_number_list

EXIT_ERROR = 2


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, Runner]]:
    parser = argparse.ArgumentParser(
        prog="wave-toolkit",
        description="Wave operators and scattering for the damped wave "
        "equation on the torus.",
    )
    runners = import_commands(parser)
    return parser, runners


def _number_list(key: str, text: str) -> List[float]:
    try:
        return parse_number_list(text)
    except ValueError as exc:
        raise ConfigError([ConfigIssue(key, str(exc))]) from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Shipped defaults, then the --config file, then explicit flags.

    Args:
        args: Parsed arguments

    Returns:
        Validated configuration

    Raises:
        ConfigError: If any layer violates a constraint
    """
    values: Dict[str, Any] = load_defaults()
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
        values.update(load_mapping(text))
    if args.preset:
        values["profile"] = resolve_preset(args.preset, init_presets())
    overrides = {
        "grid": args.grid,
        "profile": args.profile,
        "horizon_tol": args.tol,
        "seed": args.seed,
        "out": args.out,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.times is not None:
        values["times"] = _number_list("times", args.times)
    if args.omegas is not None:
        values["omegas"] = _number_list("omegas", args.omegas)
    return build_config(values)


def run_subcommand(name: str, config: RunConfig) -> int:
    """Run one subcommand on a validated configuration.

    Args:
        name: Subcommand name
        config: Run configuration

    Returns:
        Exit status: 0 on success, 1 on invariant failure, 2 on error
    """
    _, runners = build_parser()
    if name not in runners:
        raise ValueError(f"unknown subcommand {name!r}")
    context = create_context(name, config)
    context.logger.info("Run starting", config=config.model_dump(mode="json"))
    try:
        status = runners[name](context)
    except WaveToolkitError as exc:
        context.logger.error("Run failed", exc_info=exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        context.logger.error("Run aborted", exc_info=exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    context.logger.info("Run finished", status=status)
    return status


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, build the configuration and run the subcommand."""
    initialize_logger("wave_toolkit")
    logger = structlog.get_logger("wave_toolkit")
    parser, _ = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        logger.error(
            "Invalid configuration",
            issues=[str(issue) for issue in exc.issues],
        )
        for issue in exc.issues:
            print(f"config error: {issue}", file=sys.stderr)
        return EXIT_ERROR
    except (WaveToolkitError, OSError) as exc:
        logger.error("Configuration failed", exc_info=exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run_subcommand(args.subcommand, config)


if __name__ == "__main__":
    sys.exit(main())
