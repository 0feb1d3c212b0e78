#!/usr/bin/env python3
# PYTHON_ARGCOMPLETE_OK

"""
Command-line tool for sparse phase retrieval by thresholded Wirtinger flow:
single recoveries, parameter sweeps, the simulation figures and self-tests.
"""

# Load environment variables FIRST, before any other imports
from pathlib import Path
from dotenv import load_dotenv
load_dotenv(dotenv_path=Path.cwd() / ".env", interpolate=False)

import argparse
import importlib
import os
import pkgutil
import sys
from typing import NoReturn

import argcomplete

from . import __version__, commands
from .command import Command
from .errors import SparseWFError
from .log import log, log_levels, set_log_level


def discover_commands() -> list[Command]:
    """
    Automatically find all commands in the `commands` package. Returns a list
    of Command instances.
    """
    command_instances: list[Command] = []
    commands_path = Path(commands.__file__).parent

    # Find all subclasses of `Command` in the `commands` package.
    for _, module_name, _ in pkgutil.iter_modules([str(commands_path)]):
        module = importlib.import_module(f".commands.{module_name}", package="sparsewf")
        for attr_name in dir(module):
            attr = getattr(module, attr_name)
            if (
                isinstance(attr, type)
                and issubclass(attr, Command)
                and attr is not Command
            ):
                command_instances.append(attr())
    return sorted(command_instances, key=lambda command: command.name)


def handle_error(e: SparseWFError) -> NoReturn:
    """
    Log an expected failure and exit with the status of its class.
    """
    log.error(f"{type(e).__name__}: {e}")
    sys.exit(e.exit_code)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Noisy sparse phase retrieval by thresholded Wirtinger flow"
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"sparsewf {__version__}",
    )
    parser.add_argument(
        "--log-level",
        choices=list(log_levels),
        type=str.upper,
        default=os.environ.get("SPARSEWF_LOG_LEVEL", "INFO").upper(),
        help="Log level (default: $SPARSEWF_LOG_LEVEL or INFO)",
    )

    # Add subparser for each command (the arguments are in the respective
    # command class).
    subparsers = parser.add_subparsers(dest="command_name", help="Available commands")
    for command in discover_commands():
        command_parser = subparsers.add_parser(
            command.name, help=command.help, description=command.help
        )
        command.add_arguments(command_parser)
        command_parser.set_defaults(command=command)
    return parser


def main(argv: list[str] | None = None) -> None:
    parser = build_parser()

    # Parse arguments with argcomplete support.
    argcomplete.autocomplete(parser, always_complete_options="long")
    args = parser.parse_args(argv)

    try:
        set_log_level(args.log_level)
    except KeyError as e:
        parser.error(str(e))

    if not hasattr(args, "command"):
        parser.print_help()
        sys.exit(1)
    try:
        status = args.command.execute(args)
    except SparseWFError as e:
        handle_error(e)
    sys.exit(status)


if __name__ == "__main__":
    main()
