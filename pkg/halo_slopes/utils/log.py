"""Logging setup: one rich handler on the package logger, writing to stderr."""

import logging

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "halo_slopes"


def setup_logging(verbose: bool = False) -> logging.Logger:
    """Install (or replace) the stderr handler; DEBUG with ``verbose``, WARNING otherwise."""
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        if getattr(handler, "_halo_slopes", False):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    handler._halo_slopes = True
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    return logger
