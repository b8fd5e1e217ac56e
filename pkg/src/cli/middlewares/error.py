"""
Error handling middleware for the moplda command line.
File: src/cli/middlewares/error.py
"""

import argparse
import sys
from typing import Callable

from core.exceptions import ConfigError, UnresolvedIdError
from core.logging import get_logger
from ..utils.messages import format_error, format_unresolved

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

Handler = Callable[[argparse.Namespace], int]


class ErrorMiddleware:
    """Runs a subcommand handler and maps exceptions to exit codes."""

    def __call__(self, handler: Handler, args: argparse.Namespace) -> int:
        usage = args.subparser.format_usage() if hasattr(args, "subparser") else ""
        try:
            return handler(args)
        except ConfigError as e:
            sys.stderr.write(usage + format_error(args.command, e))
            return EXIT_USAGE
        except UnresolvedIdError as e:
            logger.error(f"Unresolved ids in {args.command}: {e}")
            sys.stderr.write(format_unresolved(args.command, e))
            return EXIT_FAILURE
        except Exception as e:
            logger.error(f"Command {args.command} failed: {e}", exc_info=True)
            sys.stderr.write(format_error(args.command, e))
            return EXIT_FAILURE
