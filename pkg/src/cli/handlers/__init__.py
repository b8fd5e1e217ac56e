"""
Subcommand registration for the moplda command line.
File: src/cli/handlers/__init__.py
"""

from . import bench, evaluate, gen, score, split, sweep, train


def register_all_handlers(subparsers) -> None:
    """
    Register every subcommand parser.

    Args:
        subparsers: Action returned by ArgumentParser.add_subparsers
    """
    for module in (gen, train, score, evaluate, sweep, split, bench):
        module.register(subparsers)
