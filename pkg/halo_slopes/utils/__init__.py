"""Utility functions for halo-slopes."""

from .log import setup_logging
from .reporting import Report, format_fraction, write_report

__all__ = ["Report", "format_fraction", "setup_logging", "write_report"]
