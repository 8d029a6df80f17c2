"""
CLI module for avifind.

Provides the `avifind` command-line interface.
"""

from __future__ import annotations

from avifind.cli.main import app, cli

__all__ = ["app", "cli"]
