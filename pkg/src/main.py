"""
Main entry point for the moplda command line.
"""

import sys
from typing import List, Optional

from cli.middlewares import EXIT_USAGE, ErrorMiddleware
from cli.parser import parse_args
from core.config import load_config
from core.logging import get_logger, setup_logging

logger = get_logger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one moplda subcommand.

    Args:
        argv: Command line without the program name, defaults to sys.argv[1:]

    Returns:
        int: Process exit code (0 success, 1 failure, 2 usage error)
    """
    config = load_config()
    setup_logging(config.logging.log_dir, config.logging.level)

    try:
        args = parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logger.debug(f"Running {args.command}")
    return ErrorMiddleware()(args.handler, args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
