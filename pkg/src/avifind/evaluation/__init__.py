"""
Retrieval evaluation: precision/recall measures and the (k, n, variant) grid.
"""

from __future__ import annotations

from avifind.evaluation.grid import (
    CellResult,
    EvalReport,
    Protocol,
    Variant,
    evaluate_index,
    run_grid,
)
from avifind.evaluation.metrics import (
    PRPoint,
    curve_arrays,
    interpolate_curve,
    interpolated_precision,
    pr_curve,
    precision_at,
    recall_at,
)

__all__ = [
    "CellResult",
    "EvalReport",
    "PRPoint",
    "Protocol",
    "Variant",
    "curve_arrays",
    "evaluate_index",
    "interpolate_curve",
    "interpolated_precision",
    "pr_curve",
    "precision_at",
    "recall_at",
    "run_grid",
]
