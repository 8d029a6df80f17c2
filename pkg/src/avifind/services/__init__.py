"""
Service layer for avifind.

Provides corpus ingestion for labelled image collections.
"""

from __future__ import annotations

from avifind.services.corpus import corpus_base, scan_corpus

__all__ = [
    "corpus_base",
    "scan_corpus",
]
