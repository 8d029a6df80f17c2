"""
CLI command modules for avifind.
"""

from __future__ import annotations

from avifind.cli.commands import evaluate, index, query, vocab

__all__ = [
    "evaluate",
    "index",
    "query",
    "vocab",
]
