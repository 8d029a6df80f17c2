"""
Retrieval quality measures.

Precision and recall at a cutoff, per-cutoff precision/recall curves, and
interpolated precision at fixed recall levels for averaging curves over
queries.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from avifind.constants import RECALL_LEVELS
from avifind.core.exceptions import EvaluationError


@dataclass(frozen=True)
class PRPoint:
    """Precision and recall after `cutoff` retrieved items."""

    recall: float
    precision: float
    cutoff: int


def _relevance(retrieved: Sequence[str], relevant_label: str) -> np.ndarray:
    return np.fromiter((label == relevant_label for label in retrieved), dtype=bool, count=len(retrieved))


def precision_at(retrieved: Sequence[str], relevant_label: str, m: int) -> float:
    """
    Fraction of the first m retrieved labels that are relevant.

    m is clamped to the list length, which then becomes the divisor.

    Raises:
        EvaluationError: If the list is empty or m < 1
    """
    if not retrieved:
        raise EvaluationError("Cannot compute precision of an empty retrieval list")
    if m < 1:
        raise EvaluationError(f"Cutoff must be at least 1, got {m}")
    cutoff = min(m, len(retrieved))
    hits = sum(1 for label in retrieved[:cutoff] if label == relevant_label)
    return hits / cutoff


def recall_at(retrieved: Sequence[str], relevant_label: str, total_relevant: int, m: int) -> float:
    """
    Fraction of all relevant items found in the first m retrieved labels.

    Raises:
        EvaluationError: If total_relevant < 1 or m < 1
    """
    if total_relevant < 1:
        raise EvaluationError("total_relevant must be at least 1")
    if m < 1:
        raise EvaluationError(f"Cutoff must be at least 1, got {m}")
    hits = sum(1 for label in retrieved[:m] if label == relevant_label)
    return min(hits / total_relevant, 1.0)


def curve_arrays(relevance: np.ndarray, total_relevant: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Precision and recall after every cutoff 1..len(relevance).

    Args:
        relevance: Boolean relevance of each retrieved item, in rank order
        total_relevant: Relevant items in the collection

    Returns:
        (precision, recall) arrays
    """
    if total_relevant < 1:
        raise EvaluationError("total_relevant must be at least 1")
    hits = np.cumsum(relevance, dtype=np.int64)
    cutoffs = np.arange(1, relevance.size + 1)
    return hits / cutoffs, np.minimum(hits / total_relevant, 1.0)


def pr_curve(retrieved: Sequence[str], relevant_label: str, total_relevant: int) -> list[PRPoint]:
    """
    One precision/recall point per cutoff 1..len(retrieved).

    Raises:
        EvaluationError: If total_relevant < 1
    """
    precision, recall = curve_arrays(_relevance(retrieved, relevant_label), total_relevant)
    return [
        PRPoint(recall=float(r), precision=float(p), cutoff=i + 1)
        for i, (p, r) in enumerate(zip(precision.tolist(), recall.tolist()))
    ]


def interpolate_curve(
    precision: np.ndarray,
    recall: np.ndarray,
    levels: Sequence[float] = RECALL_LEVELS,
) -> np.ndarray:
    """
    Interpolated precision at each recall level.

    The value at level r is the best precision reached at any recall >= r,
    or 0 when r is never reached.
    """
    out = np.zeros(len(levels))
    if precision.size == 0:
        return out
    # running max from the tail
    best_after = np.maximum.accumulate(precision[::-1])[::-1]
    for i, level in enumerate(levels):
        reached = np.flatnonzero(recall >= level - 1e-12)
        if reached.size:
            out[i] = best_after[reached[0]]
    return out


def interpolated_precision(
    curve: Sequence[PRPoint],
    levels: Sequence[float] = RECALL_LEVELS,
) -> np.ndarray:
    """Interpolated precision of a PRPoint curve at fixed recall levels."""
    precision = np.array([p.precision for p in curve])
    recall = np.array([p.recall for p in curve])
    return interpolate_curve(precision, recall, levels)
