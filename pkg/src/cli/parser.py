"""
Argument parsing and run-configuration merging for the moplda command line.
File: src/cli/parser.py
"""

import argparse
from typing import Dict, List, Optional, Sequence

from core.config import parse_bool, read_run_config
from core.exceptions import ConfigError, UsageError
from core.logging import get_logger

logger = get_logger(__name__)

PROG = "moplda"


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return number


def seed_type(value: str) -> int:
    number = int(value)
    if not 0 <= number < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    """Create the top-level parser with one subparser per subcommand."""
    from .handlers import register_all_handlers

    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Single- and multi-objective sGPLDA speaker verification backend"
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    register_all_handlers(subparsers)
    return parser


def add_subcommand(
    subparsers,
    name: str,
    help_text: str,
    handler,
    required: Sequence[str] = ()
) -> argparse.ArgumentParser:
    """
    Add a subcommand parser carrying its handler and required options.

    Required options are checked after the config file is merged, so they
    may come from either source.
    """
    sub = subparsers.add_parser(name, help=help_text, description=help_text)
    sub.add_argument("--config", metavar="FILE", help="key=value run configuration file")
    sub.set_defaults(handler=handler, required_options=tuple(required), subparser=sub)
    return sub


def _option_actions(sub: argparse.ArgumentParser) -> Dict[str, argparse.Action]:
    return {
        action.dest: action
        for action in sub._actions
        if action.option_strings and action.dest not in ("help", "config")
    }


def _convert(action: argparse.Action, key: str, raw: str):
    try:
        if action.nargs == 0:
            value = parse_bool(raw)
            return value if action.const is True else not value
        value = action.type(raw) if action.type is not None else raw
    except (ValueError, TypeError, argparse.ArgumentTypeError) as e:
        raise UsageError(f"config key {key!r}: invalid value {raw!r}: {e}") from None
    if action.choices is not None and value not in action.choices:
        choices = ", ".join(str(c) for c in action.choices)
        raise UsageError(f"config key {key!r}: invalid choice {raw!r} (choose from {choices})")
    return value


def apply_config_file(sub: argparse.ArgumentParser, path: str) -> None:
    """
    Install config file values as the subparser's defaults.

    Raises:
        UsageError: On unknown keys or values that fail conversion
        ConfigError: On malformed files
    """
    actions = _option_actions(sub)
    defaults = {}
    for key, raw in read_run_config(path).items():
        if key not in actions:
            raise UsageError(f"unknown config key {key!r} in {path}")
        defaults[key] = _convert(actions[key], key, raw)
    sub.set_defaults(**defaults)
    logger.debug(f"Applied {len(defaults)} config values from {path}")


def check_required(args: argparse.Namespace) -> None:
    missing = [
        "--" + name.replace("_", "-")
        for name in args.required_options
        if getattr(args, name, None) is None
    ]
    if missing:
        raise UsageError(f"the following arguments are required: {', '.join(missing)}")


def parse_args(argv: Optional[List[str]]) -> argparse.Namespace:
    """
    Parse the command line, merging a --config file under the flags.

    Raises:
        SystemExit: With status 2 and usage text on any usage error, or 0 on --help
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = args.subparser
    try:
        if args.config:
            apply_config_file(sub, args.config)
            args = parser.parse_args(argv)
        check_required(args)
    except ConfigError as e:
        sub.error(str(e))
    return args
