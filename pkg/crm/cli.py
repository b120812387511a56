"""
Command line front end

    python -m crm [--seed S] [--out PATH] [--config JSON] [--log-level LEVEL] <command> ...

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

import argparse
import sys
from typing import List, Optional

from .commands import all_commands
from .common import configure_logger, logger
from .core.base import EXIT_CONFIG, CommandResponse, ConfigError, handle_command
from .core.io import STDIO, read_json

LOG_LEVELS = ("debug", "info", "warning", "error")

GLOBAL_DEFAULTS = {"seed": 0, "out": None, "config": None, "log_level": None}


def _global_options() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    parser.add_argument("--config", default=argparse.SUPPRESS, help="JSON file of option values")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=argparse.SUPPRESS)
    return parser


def build_parser():
    """The top level parser and a name -> subparser map."""
    common = _global_options()
    parser = argparse.ArgumentParser(
        prog="crm",
        description="Conditional risk minimization for dependent processes",
        parents=[common],
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    commands = {}
    for module in all_commands:
        sub = subparsers.add_parser(module.NAME, help=module.HELP, parents=[common])
        module.add_arguments(sub)
        sub.set_defaults(module=module)
        commands[module.NAME] = sub
    return parser, commands


def _apply_config(sub: argparse.ArgumentParser, path: str) -> None:
    """Use the JSON file's values as defaults of the subcommand's options."""
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    known = set(vars(sub.parse_known_args([])[0]))
    values = {key.replace("-", "_"): value for key, value in data.items()}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown options {unknown}")
    sub.set_defaults(**values)


def _parse(parser: argparse.ArgumentParser, argv: List[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    args.seed_given = hasattr(args, "seed")
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    return args


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser, commands = build_parser()
    args = _parse(parser, argv)
    if args.log_level:
        configure_logger(level=args.log_level)

    module = args.module
    # compare reads --config into its ExperimentConfig itself
    if args.config and module.NAME != "compare":
        try:
            _apply_config(commands[module.NAME], args.config)
        except ConfigError as e:
            print(CommandResponse.error(e.message, EXIT_CONFIG, e.error_type))
            return EXIT_CONFIG
        args = _parse(parser, argv)

    code, envelope = handle_command(module.NAME, module.run, args)
    if code == 0 and module.WRITES_DATA and args.out in STDIO:
        logger.debug(envelope)
    else:
        print(envelope)
    return code
