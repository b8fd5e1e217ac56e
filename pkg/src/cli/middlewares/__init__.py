"""
Middleware for the moplda command line.
File: src/cli/middlewares/__init__.py
"""

from .error import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, ErrorMiddleware

__all__ = ["EXIT_FAILURE", "EXIT_OK", "EXIT_USAGE", "ErrorMiddleware"]
