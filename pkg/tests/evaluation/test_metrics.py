"""
Tests for precision, recall and interpolated PR curves.
"""

from __future__ import annotations

import numpy as np
import pytest

from avifind.core.exceptions import EvaluationError
from avifind.evaluation.metrics import (
    curve_arrays,
    interpolate_curve,
    interpolated_precision,
    pr_curve,
    precision_at,
    recall_at,
)


class TestPrecisionAt:
    """Tests for precision_at."""

    def test_fraction_of_relevant(self) -> None:
        assert precision_at(["a", "b", "a", "a"], "a", 2) == 0.5
        assert precision_at(["a", "b", "a", "a"], "a", 4) == 0.75

    def test_cutoff_clamped_to_list(self) -> None:
        """m beyond the list divides by the list length."""
        assert precision_at(["a", "b", "a"], "a", 10) == pytest.approx(2 / 3)

    def test_empty_list(self) -> None:
        with pytest.raises(EvaluationError):
            precision_at([], "a", 1)

    def test_zero_cutoff(self) -> None:
        with pytest.raises(EvaluationError):
            precision_at(["a"], "a", 0)

    def test_range(self) -> None:
        rng = np.random.default_rng(0)
        for _ in range(50):
            labels = [str(v) for v in rng.integers(0, 3, int(rng.integers(1, 30)))]
            value = precision_at(labels, "1", int(rng.integers(1, 40)))
            assert 0.0 <= value <= 1.0


class TestRecallAt:
    """Tests for recall_at."""

    def test_fraction_found(self) -> None:
        assert recall_at(["a", "b", "a", "a"], "a", 4, 3) == 0.5

    def test_never_above_one(self) -> None:
        assert recall_at(["a", "a", "a"], "a", 2, 3) == 1.0

    def test_needs_relevant_items(self) -> None:
        with pytest.raises(EvaluationError):
            recall_at(["a"], "a", 0, 1)


class TestCurves:
    """Tests for pr_curve and interpolation."""

    def test_points_per_cutoff(self) -> None:
        curve = pr_curve(["a", "b", "a"], "a", 2)

        assert [p.cutoff for p in curve] == [1, 2, 3]
        assert [p.precision for p in curve] == pytest.approx([1.0, 0.5, 2 / 3])
        assert [p.recall for p in curve] == pytest.approx([0.5, 0.5, 1.0])

    def test_recall_is_non_decreasing(self) -> None:
        relevance = np.random.default_rng(5).random(40) < 0.3
        _, recall = curve_arrays(relevance, int(relevance.sum()) + 2)
        assert np.all(np.diff(recall) >= 0)

    def test_interpolation_takes_best_later_precision(self) -> None:
        """Levels up to 0.5 see precision 1; later levels see 2/3."""
        curve = pr_curve(["a", "b", "a"], "a", 2)

        values = interpolated_precision(curve)

        assert values[:5].tolist() == pytest.approx([1.0] * 5)
        assert values[5:].tolist() == pytest.approx([2 / 3] * 5)

    def test_unreached_levels_are_zero(self) -> None:
        """Only half of the relevant items are retrieved."""
        precision, recall = curve_arrays(np.array([True, False]), 2)

        values = interpolate_curve(precision, recall)

        assert values[4] == pytest.approx(1.0)
        assert np.all(values[5:] == 0.0)

    def test_interpolated_is_non_increasing(self) -> None:
        rng = np.random.default_rng(11)
        for _ in range(30):
            relevance = rng.random(25) < 0.4
            if not relevance.any():
                continue
            values = interpolate_curve(*curve_arrays(relevance, int(relevance.sum())))
            assert np.all(np.diff(values) <= 1e-12)

    def test_empty_curve(self) -> None:
        assert interpolate_curve(np.zeros(0), np.zeros(0)).tolist() == [0.0] * 10
