#!/usr/bin/env python3
"""Main entry point for halo-slopes."""

import sys

from halo_slopes.cli import cli

if __name__ == "__main__":
    sys.exit(cli())
