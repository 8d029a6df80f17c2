"""
Tests for vocabulary training, assignment and the vocabulary file.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from avifind.core.exceptions import (
    DimensionMismatchError,
    FormatVersionError,
    InsufficientDescriptorsError,
    MalformedRecordError,
)
from avifind.retrieval.vocabulary import (
    Vocabulary,
    assign_all,
    assign_nearest,
    load_vocabulary,
    save_vocabulary,
    subsample_descriptors,
    train_kmeans,
)


def _blobs(seed: int = 0, per_blob: int = 40) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.normal((0.0, 0.0), 0.5, (per_blob, 2))
    b = rng.normal((10.0, 10.0), 0.5, (per_blob, 2))
    return np.vstack([a, b])


class TestTrainKmeans:
    """Tests for train_kmeans."""

    def test_k_equals_distinct_points(self) -> None:
        """One word per distinct point gives zero distortion."""
        data = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 5.0], [3.0, 3.0], [9.0, 1.0]])

        vocab = train_kmeans(data, k=5, seed=0)

        assert vocab.train_meta.distortion == 0.0
        assert {tuple(row) for row in vocab.centroids.tolist()} == {tuple(r) for r in data.tolist()}

    def test_single_word_is_the_mean(self) -> None:
        data = np.random.default_rng(4).normal(3.0, 2.0, (200, 6))

        vocab = train_kmeans(data, k=1, seed=9)

        assert np.all(np.abs(vocab.centroids[0] - data.mean(axis=0)) <= 1e-9)

    def test_two_blobs_separate(self) -> None:
        """Each blob ends up under its own word."""
        data = _blobs()

        vocab = train_kmeans(data, k=2, seed=1)
        labels = assign_all(data, vocab)

        assert len(set(labels[:40].tolist())) == 1
        assert len(set(labels[40:].tolist())) == 1
        assert labels[0] != labels[40]

    def test_distortion_never_increases(self) -> None:
        """Lloyd steps do not raise the mean squared distance."""
        rng = np.random.default_rng(123)
        for trial in range(50):
            data = rng.normal(0.0, 1.0, (int(rng.integers(20, 80)), int(rng.integers(2, 6))))
            k = int(rng.integers(2, 8))

            history = train_kmeans(data, k=k, seed=trial).train_meta.history

            assert len(history) >= 2
            for before, after in zip(history, history[1:]):
                assert after <= before + 1e-12 * max(before, 1.0)

    def test_same_seed_same_vocabulary(self) -> None:
        data = np.random.default_rng(7).uniform(0, 1, (150, 10))

        a = train_kmeans(data, k=6, seed=21)
        b = train_kmeans(data, k=6, seed=21)

        assert np.array_equal(a.centroids, b.centroids)
        assert a.fingerprint == b.fingerprint

    def test_accepts_vector_sequence(self) -> None:
        rows = [np.array([0.0, 0.0]), np.array([4.0, 4.0]), np.array([4.0, 5.0])]
        vocab = train_kmeans(rows, k=2, seed=0)
        assert (vocab.k, vocab.d) == (2, 2)

    def test_too_few_distinct_descriptors(self) -> None:
        """Duplicates do not count towards k."""
        data = np.array([[1.0, 1.0]] * 10 + [[2.0, 2.0]] * 10)

        with pytest.raises(InsufficientDescriptorsError) as exc_info:
            train_kmeans(data, k=3)

        assert exc_info.value.distinct == 2

    def test_no_descriptors(self) -> None:
        with pytest.raises(InsufficientDescriptorsError):
            train_kmeans(np.zeros((0, 4)), k=1)

    def test_ragged_vectors(self) -> None:
        with pytest.raises(DimensionMismatchError):
            train_kmeans([np.zeros(3), np.zeros(4)], k=1)

    def test_metadata(self) -> None:
        data = _blobs(seed=2)
        meta = train_kmeans(data, k=2, seed=5).train_meta
        assert meta.seed == 5
        assert meta.descriptor_count == 80
        assert meta.iterations is not None and meta.iterations >= 1


class TestAssignment:
    """Tests for assign_nearest and assign_all."""

    def test_tie_goes_to_lowest_index(self) -> None:
        """A descriptor equidistant from two words picks the first."""
        vocab = Vocabulary(centroids=np.array([[1.0, 0.0], [-1.0, 0.0], [5.0, 5.0]]))
        assert assign_nearest(np.array([0.0, 0.0]), vocab) == 0

    def test_matches_brute_force(self) -> None:
        rng = np.random.default_rng(31)
        centroids = rng.normal(0, 1, (17, 8))
        data = rng.normal(0, 1, (300, 8))
        vocab = Vocabulary(centroids=centroids)

        expected = []
        for row in data:
            best, best_dist = 0, float("inf")
            for j, c in enumerate(centroids):
                dist = float(((row - c) ** 2).sum())
                if dist < best_dist:
                    best, best_dist = j, dist
            expected.append(best)

        assert assign_all(data, vocab).tolist() == expected

    def test_wrong_dimension(self) -> None:
        vocab = Vocabulary(centroids=np.zeros((3, 4)))
        with pytest.raises(DimensionMismatchError):
            assign_nearest(np.zeros(5), vocab)

    def test_empty_batch(self) -> None:
        vocab = Vocabulary(centroids=np.zeros((3, 4)))
        assert assign_all(np.zeros((0, 4)), vocab).size == 0


class TestSubsample:
    """Tests for subsample_descriptors."""

    def test_under_limit_is_untouched(self) -> None:
        data = np.arange(20.0).reshape(10, 2)
        assert subsample_descriptors(data, 50, seed=0) is data
        assert subsample_descriptors(data, None, seed=0) is data

    def test_limit_and_order(self) -> None:
        """Kept rows are a sorted subset of the input."""
        data = np.arange(200.0).reshape(100, 2)

        kept = subsample_descriptors(data, 30, seed=4)

        assert kept.shape == (30, 2)
        assert np.all(np.diff(kept[:, 0]) > 0)
        assert np.array_equal(kept, subsample_descriptors(data, 30, seed=4))


class TestVocabularyFile:
    """Tests for save_vocabulary and load_vocabulary."""

    def test_round_trip(self, tmp_path: Path) -> None:
        """Loaded centroids match to 9 significant digits; fingerprints agree."""
        vocab = train_kmeans(np.random.default_rng(0).uniform(0, 1, (60, 5)), k=4, seed=3)
        path = tmp_path / "vocab.txt"

        fingerprint = save_vocabulary(vocab, path)
        loaded = load_vocabulary(path)

        assert fingerprint == vocab.fingerprint == loaded.fingerprint
        assert (loaded.k, loaded.d, loaded.seed) == (4, 5, 3)
        assert np.allclose(loaded.centroids, vocab.centroids, rtol=1e-8, atol=0)

    def test_header_layout(self, tmp_path: Path) -> None:
        vocab = Vocabulary(centroids=np.array([[0.5, -0.0], [1.0, 2.0]]))
        path = tmp_path / "vocab.txt"
        save_vocabulary(vocab, path)

        lines = path.read_text().splitlines()

        assert lines == ["AVIVOCAB 1", "2 2 0", "0.5 0", "1 2"]

    def test_wrong_version(self, tmp_path: Path) -> None:
        path = tmp_path / "vocab.txt"
        path.write_text("AVIVOCAB 2\n1 1 0\n0.5\n")
        with pytest.raises(FormatVersionError):
            load_vocabulary(path)

    def test_short_row(self, tmp_path: Path) -> None:
        """A centroid row with too few values names its line."""
        path = tmp_path / "vocab.txt"
        path.write_text("AVIVOCAB 1\n2 3 0\n1 2 3\n4 5\n")

        with pytest.raises(MalformedRecordError) as exc_info:
            load_vocabulary(path)

        assert exc_info.value.line_no == 4

    def test_non_finite_value(self, tmp_path: Path) -> None:
        path = tmp_path / "vocab.txt"
        path.write_text("AVIVOCAB 1\n1 2 0\n1 nan\n")

        with pytest.raises(MalformedRecordError) as exc_info:
            load_vocabulary(path)

        assert exc_info.value.line_no == 3

    def test_missing_rows(self, tmp_path: Path) -> None:
        path = tmp_path / "vocab.txt"
        path.write_text("AVIVOCAB 1\n3 1 0\n1\n2\n")
        with pytest.raises(MalformedRecordError):
            load_vocabulary(path)

    def test_bad_header_fields(self, tmp_path: Path) -> None:
        path = tmp_path / "vocab.txt"
        path.write_text("AVIVOCAB 1\nthree 1 0\n")

        with pytest.raises(MalformedRecordError) as exc_info:
            load_vocabulary(path)

        assert exc_info.value.line_no == 2
