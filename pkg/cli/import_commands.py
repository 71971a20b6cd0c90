"""Register subcommands on the argument parser."""
import argparse
from typing import Callable
from typing import Dict

from cli.commands import COMMANDS
from lib.cli.context import Context

Runner = Callable[[Context], int]


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every subcommand; unset flags keep config values."""
    parser.add_argument("--config", help="YAML configuration file")
    parser.add_argument("--grid", help="grid such as 1d:256 or 2d:64")
    parser.add_argument("--profile", help="dissipation profile specification")
    parser.add_argument("--preset", help="named profile from presets.yaml")
    parser.add_argument("--tol", type=float, help="horizon tolerance")
    parser.add_argument("--seed", type=int, help="random data seed")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("--times", help="comma separated sweep times")
    parser.add_argument("--omegas", help="comma separated frequencies")


def import_commands(parser: argparse.ArgumentParser) -> Dict[str, Runner]:
    """Add one subparser per subcommand.

    Args:
        parser: Top-level parser

    Returns:
        Mapping of subcommand name to its runner
    """
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    runners = {}
    for command in COMMANDS:
        subparser = subparsers.add_parser(command.NAME, help=command.HELP)
        add_common_flags(subparser)
        runners[command.NAME] = command.run
    return runners
