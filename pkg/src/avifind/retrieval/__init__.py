"""
Vocabulary training, bag-of-words indexing and ranked retrieval.
"""

from __future__ import annotations

from avifind.retrieval.index import (
    BowHistogram,
    BowIndex,
    IndexEntry,
    RankedHit,
    RetrievalResult,
    bow_distance,
    build_index,
    index_descriptor_sets,
    iter_rankings,
    load_index,
    quantize,
    query,
    save_index,
)
from avifind.retrieval.vocabulary import (
    TrainingMeta,
    Vocabulary,
    assign_all,
    assign_nearest,
    load_vocabulary,
    save_vocabulary,
    subsample_descriptors,
    train_kmeans,
)

__all__ = [
    "BowHistogram",
    "BowIndex",
    "IndexEntry",
    "RankedHit",
    "RetrievalResult",
    "TrainingMeta",
    "Vocabulary",
    "assign_all",
    "assign_nearest",
    "bow_distance",
    "build_index",
    "index_descriptor_sets",
    "iter_rankings",
    "load_index",
    "load_vocabulary",
    "quantize",
    "query",
    "save_index",
    "save_vocabulary",
    "subsample_descriptors",
    "train_kmeans",
]
