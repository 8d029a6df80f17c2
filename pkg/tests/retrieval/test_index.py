"""
Tests for quantization, ranked retrieval and the index file.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from avifind.core.exceptions import (
    DimensionMismatchError,
    DuplicateImageIdError,
    EmptyIndexError,
    FingerprintMismatchError,
    FormatVersionError,
    MalformedRecordError,
)
from avifind.features.descriptors import DescriptorSet, EmptyReason, FusedDescriptor, describe_image
from avifind.features.imaging import RasterImage
from avifind.models.params import DescriptorConfig, ShapeContextParams
from avifind.retrieval.index import (
    BowHistogram,
    BowIndex,
    IndexEntry,
    bow_distance,
    build_index,
    index_descriptor_sets,
    iter_rankings,
    load_index,
    query,
    quantize,
    save_index,
)
from avifind.retrieval.vocabulary import Vocabulary, train_kmeans

RasterFactory = Callable[..., RasterImage]


def _bow(*weights: float, raw: int = 1) -> BowHistogram:
    return BowHistogram(weights=np.array(weights, dtype=np.float64), raw_count=raw)


def _descriptor_set(image_id: str, rows: list[list[float]]) -> DescriptorSet:
    return DescriptorSet(
        image_id=image_id,
        dimension=len(rows[0]),
        descriptors=[FusedDescriptor(vector=np.array(r, dtype=np.float64)) for r in rows],
    )


def _random_index(n: int, k: int = 4, seed: int = 0, fingerprint: str = "f" * 64) -> BowIndex:
    """Histograms with eighths as weights, so several entries tie."""
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(n):
        counts = np.bincount(rng.integers(0, k, 8), minlength=k)
        entries.append(
            IndexEntry(image_id=f"c{i % 5}/img_{i:03d}", label=f"c{i % 5}", bow=_bow(*(counts / 8), raw=8))
        )
    return BowIndex(vocab_fingerprint=fingerprint, k=k, entries=entries)


def _dirichlet_index(n: int, k: int = 6, seed: int = 0) -> BowIndex:
    """Distinct continuous histograms, so no two entries tie."""
    rng = np.random.default_rng(seed)
    entries = [
        IndexEntry(f"c{i % 3}/img_{i:03d}", f"c{i % 3}", _bow(*rng.dirichlet(np.ones(k)), raw=20))
        for i in range(n)
    ]
    return BowIndex(vocab_fingerprint="d" * 64, k=k, entries=entries)


def _eighths(rng: np.random.Generator, k: int = 4) -> BowHistogram:
    return _bow(*(np.bincount(rng.integers(0, k, 8), minlength=k) / 8), raw=8)


def _oracle_ids(q: BowHistogram, index: BowIndex) -> list[str]:
    """Brute force: non-empty entries by (distance, id), then empty ones."""
    return [
        e.image_id
        for e in sorted(index.entries, key=lambda e: (e.flagged, bow_distance(q, e.bow), e.image_id))
    ]


@pytest.fixture
def line_vocab() -> Vocabulary:
    """Two words in 3 dimensions."""
    return Vocabulary(centroids=np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]]))


class TestQuantize:
    """Tests for quantize and bow_distance."""

    def test_counts_are_normalized(self, line_vocab: Vocabulary) -> None:
        """Three descriptors near word 0 and one near word 1."""
        ds = _descriptor_set("a", [[0.1, 0, 0], [0, 0.2, 0], [0, 0, 0.1], [0.9, 1, 1]])

        bow = quantize(ds, line_vocab)

        assert bow.weights.tolist() == [0.75, 0.25]
        assert bow.raw_count == 4
        assert bow.weights.sum() == pytest.approx(1.0)

    def test_empty_set_gives_zero_histogram(self, line_vocab: Vocabulary) -> None:
        ds = DescriptorSet.empty("blank", 3, EmptyReason.NO_CONTOUR)

        bow = quantize(ds, line_vocab)

        assert bow.is_empty
        assert bow.weights.tolist() == [0.0, 0.0]

    def test_dimension_mismatch(self, line_vocab: Vocabulary) -> None:
        with pytest.raises(DimensionMismatchError):
            quantize(_descriptor_set("a", [[0.0, 0.0]]), line_vocab)

    def test_distances(self) -> None:
        """Identical, disjoint and half-overlapping histograms."""
        assert bow_distance(_bow(0.5, 0.5, 0.0), _bow(0.5, 0.5, 0.0)) == 0.0
        assert bow_distance(_bow(1.0, 0.0), _bow(0.0, 1.0)) == pytest.approx(2.0)
        assert bow_distance(_bow(0.5, 0.5, 0.0), _bow(0.5, 0.0, 0.5)) == pytest.approx(1.0)

    def test_distance_length_mismatch(self) -> None:
        with pytest.raises(DimensionMismatchError):
            bow_distance(_bow(1.0), _bow(0.5, 0.5))

    def test_distance_is_a_metric(self) -> None:
        """Symmetry, zero self-distance and the triangle inequality on random triples."""
        rng = np.random.default_rng(17)
        for _ in range(200):
            a, b, c = (_bow(*rng.dirichlet(np.ones(7))) for _ in range(3))

            assert bow_distance(a, a) == 0.0
            assert bow_distance(a, b) == bow_distance(b, a)
            assert bow_distance(a, c) <= bow_distance(a, b) + bow_distance(b, c) + 1e-12
            assert 0.0 <= bow_distance(a, b) <= 2.0 + 1e-12

    def test_descriptor_order_does_not_matter(self) -> None:
        """Shuffling the descriptors of an image leaves its histogram unchanged."""
        rng = np.random.default_rng(8)
        vocab = Vocabulary(centroids=rng.normal(0, 1, (6, 5)))
        rows = rng.normal(0, 1, (40, 5)).tolist()
        shuffled = [rows[i] for i in rng.permutation(len(rows))]

        a = quantize(_descriptor_set("x", rows), vocab)
        b = quantize(_descriptor_set("x", shuffled), vocab)

        assert np.array_equal(a.weights, b.weights)
        assert a.raw_count == b.raw_count == 40


class TestQuery:
    """Tests for query and iter_rankings."""

    def test_self_is_first(self) -> None:
        """An entry's own histogram retrieves it at distance 0."""
        index = BowIndex(
            vocab_fingerprint="x",
            k=3,
            entries=[
                IndexEntry("a/1", "a", _bow(1.0, 0.0, 0.0)),
                IndexEntry("b/1", "b", _bow(0.0, 1.0, 0.0)),
                IndexEntry("c/1", "c", _bow(0.2, 0.3, 0.5)),
            ],
        )

        result = query(_bow(0.2, 0.3, 0.5), index, top_m=3, query_id="q")

        assert result.query_id == "q"
        assert result.ranked[0].image_id == "c/1"
        assert result.ranked[0].distance == 0.0

    def test_top_m_is_clamped(self) -> None:
        index = _random_index(4)
        assert len(query(_bow(1.0, 0.0, 0.0, 0.0), index, top_m=10)) == 4

    def test_matches_sorted_oracle(self) -> None:
        """Ranking equals sorting all entries by (distance, image id)."""
        index = _random_index(100, seed=3)
        q = _bow(0.25, 0.25, 0.5, 0.0)

        result = query(q, index, top_m=100)

        oracle = sorted(index.entries, key=lambda e: (bow_distance(q, e.bow), e.image_id))
        assert [hit.image_id for hit in result.ranked] == [e.image_id for e in oracle]
        distances = [hit.distance for hit in result.ranked]
        assert distances == sorted(distances)

    def test_random_queries_match_oracle(self) -> None:
        """100 random queries rank exactly like a brute-force sort."""
        index = _random_index(100, seed=12)
        rng = np.random.default_rng(13)

        for _ in range(100):
            q = _eighths(rng)
            result = query(q, index, top_m=len(index))
            assert [hit.image_id for hit in result.ranked] == _oracle_ids(q, index)

    def test_every_image_retrieves_itself(self) -> None:
        """Each of 30 images is its own top hit at distance 0."""
        index = _dirichlet_index(30, seed=2)

        for entry in index.entries:
            top = query(entry.bow, index, top_m=1).ranked[0]
            assert top.image_id == entry.image_id
            assert top.distance == 0.0

    def test_entry_order_does_not_matter(self) -> None:
        """Permuting the index entries leaves every ranking unchanged."""
        index = _random_index(40, seed=21)
        rng = np.random.default_rng(22)
        permuted = BowIndex(
            vocab_fingerprint=index.vocab_fingerprint,
            k=index.k,
            entries=[index.entries[i] for i in rng.permutation(len(index))],
        )

        for _ in range(20):
            q = _eighths(rng)
            assert query(q, index, top_m=40).ranked == query(q, permuted, top_m=40).ranked

    def test_empty_entries_rank_last(self) -> None:
        """An image without descriptors follows every real match; its distance is kept."""
        index = BowIndex(
            vocab_fingerprint="x",
            k=3,
            entries=[
                IndexEntry("a/far", "a", _bow(0.0, 0.25, 0.75)),
                IndexEntry("b/empty", "b", BowHistogram.zeros(3)),
            ],
        )

        ranked = query(_bow(1.0, 0.0, 0.0), index, top_m=2).ranked

        assert [(h.image_id, h.distance) for h in ranked] == [("a/far", 2.0), ("b/empty", 1.0)]

    def test_empty_query_ranks_by_distance(self) -> None:
        """An empty query is closest to other empty histograms."""
        index = BowIndex(
            vocab_fingerprint="x",
            k=2,
            entries=[
                IndexEntry("a/1", "a", _bow(1.0, 0.0)),
                IndexEntry("b/empty", "b", BowHistogram.zeros(2)),
            ],
        )

        ranked = query(BowHistogram.zeros(2), index, top_m=2).ranked

        assert [h.image_id for h in ranked] == ["b/empty", "a/1"]
        assert ranked[0].distance == 0.0

    def test_rankings_with_empty_entries(self) -> None:
        """Batched rankings put empty entries last, as single queries do."""
        base = _random_index(12, seed=5)
        entries = [*base.entries, IndexEntry("z/none", "c0", BowHistogram.zeros(4))]
        index = BowIndex(vocab_fingerprint="x", k=4, entries=entries)

        for pos, order in iter_rankings(index, block=5):
            entry = index.entries[pos]
            single = query(entry.bow, index, top_m=len(index), exclude_id=entry.image_id)
            ids = [index.entries[i].image_id for i in order]
            assert ids == [h.image_id for h in single.ranked]
            if not entry.flagged:
                assert ids[-1] == "z/none"

    def test_exclude_id(self) -> None:
        index = _random_index(10)
        target = index.entries[3]

        result = query(target.bow, index, top_m=10, exclude_id=target.image_id)

        assert len(result) == 9
        assert target.image_id not in [hit.image_id for hit in result.ranked]

    def test_empty_index(self) -> None:
        with pytest.raises(EmptyIndexError):
            query(_bow(1.0), BowIndex(vocab_fingerprint="x", k=1), top_m=1)

    def test_query_length_mismatch(self) -> None:
        with pytest.raises(DimensionMismatchError):
            query(_bow(1.0, 0.0), _random_index(3), top_m=1)

    def test_rankings_match_single_queries(self) -> None:
        """Batched leave-one-out rankings agree with per-entry queries."""
        index = _random_index(30, seed=9)

        for pos, order in iter_rankings(index, block=7):
            entry = index.entries[pos]
            single = query(entry.bow, index, top_m=len(index), exclude_id=entry.image_id)
            assert [index.entries[i].image_id for i in order] == [h.image_id for h in single.ranked]


class TestBowIndex:
    """Tests for BowIndex invariants."""

    def test_duplicate_ids(self) -> None:
        with pytest.raises(DuplicateImageIdError):
            BowIndex(
                vocab_fingerprint="x",
                k=1,
                entries=[IndexEntry("a/1", "a", _bow(1.0)), IndexEntry("a/1", "a", _bow(1.0))],
            )

    def test_histogram_length(self) -> None:
        with pytest.raises(DimensionMismatchError):
            BowIndex(vocab_fingerprint="x", k=2, entries=[IndexEntry("a/1", "a", _bow(1.0))])

    def test_class_counts(self) -> None:
        assert _random_index(10).class_counts() == {"c0": 2, "c1": 2, "c2": 2, "c3": 2, "c4": 2}

    def test_flagged_entries(self, line_vocab: Vocabulary) -> None:
        """Images without descriptors are indexed but flagged."""
        index = index_descriptor_sets(
            [
                ("a", _descriptor_set("a/1", [[0.0, 0.0, 0.0]])),
                ("b", DescriptorSet.empty("b/1", 3, EmptyReason.NO_KEYPOINTS)),
            ],
            line_vocab,
        )

        assert [e.flagged for e in index.entries] == [False, True]
        assert index.vocab_fingerprint == line_vocab.fingerprint


class TestBuildIndex:
    """Tests for build_index."""

    @pytest.fixture
    def shape_vocab(self, raster: RasterFactory) -> Vocabulary:
        config = DescriptorConfig(n=60)
        data = np.vstack(
            [
                describe_image(raster(shape, "red", seed=i), config).matrix
                for i, shape in enumerate(("disk", "square"))
            ]
        )
        return train_kmeans(data, k=3, seed=0)

    def test_single_image(self, raster: RasterFactory, shape_vocab: Vocabulary) -> None:
        images = [("disk/1", "disk", raster("disk", "red"))]

        index = build_index(images, shape_vocab, DescriptorConfig(n=60))

        assert len(index) == 1
        assert index.entries[0].bow.weights.sum() == pytest.approx(1.0)

    def test_deterministic(self, raster: RasterFactory, shape_vocab: Vocabulary) -> None:
        images = [
            ("disk/1", "disk", raster("disk", "red", seed=5)),
            ("square/1", "square", raster("square", "red", seed=6)),
        ]
        config = DescriptorConfig(n=60)

        a = build_index(images, shape_vocab, config)
        b = build_index(images, shape_vocab, config)

        assert np.array_equal(a.matrix, b.matrix)

    def test_duplicate_image_ids(self, raster: RasterFactory, shape_vocab: Vocabulary) -> None:
        img = raster("disk", "red")
        with pytest.raises(DuplicateImageIdError):
            build_index([("x", "disk", img), ("x", "disk", img)], shape_vocab, DescriptorConfig(n=60))

    def test_config_must_match_vocabulary(self, raster: RasterFactory, shape_vocab: Vocabulary) -> None:
        config = DescriptorConfig(n=60, shape=ShapeContextParams(radial_bins=3))
        with pytest.raises(DimensionMismatchError):
            build_index([("x", "disk", raster("disk", "red"))], shape_vocab, config)


class TestIndexFile:
    """Tests for save_index and load_index."""

    def test_rankings_survive_reload(self, tmp_path: Path) -> None:
        index = _random_index(25, seed=4)
        path = tmp_path / "index.txt"

        save_index(index, path)
        loaded = load_index(path)

        q = _bow(0.5, 0.0, 0.25, 0.25)
        before = query(q, index, top_m=25).ranked
        after = query(q, loaded, top_m=25).ranked
        assert [h.image_id for h in before] == [h.image_id for h in after]
        assert [h.distance for h in before] == pytest.approx([h.distance for h in after], abs=1e-8)
        assert loaded.labels() == index.labels()

    def test_random_queries_survive_reload(self, tmp_path: Path) -> None:
        """20 random queries rank identically before and after a round trip."""
        index = _dirichlet_index(40, seed=6)
        path = tmp_path / "index.txt"
        save_index(index, path)
        loaded = load_index(path)
        rng = np.random.default_rng(7)

        for _ in range(20):
            q = _bow(*rng.dirichlet(np.ones(6)))
            before = query(q, index, top_m=40).ranked
            after = query(q, loaded, top_m=40).ranked
            assert [h.image_id for h in before] == [h.image_id for h in after]
            assert [h.distance for h in after] == pytest.approx([h.distance for h in before], abs=1e-7)

    def test_header_and_entry_layout(self, tmp_path: Path) -> None:
        entry = IndexEntry("a/1", "a", _bow(0.25, 0.75, raw=4))
        index = BowIndex(vocab_fingerprint="ab" * 32, k=2, entries=[entry])
        path = tmp_path / "index.txt"

        save_index(index, path)

        lines = path.read_text().splitlines()
        assert lines == ["AVIIDX 1", "2 1 " + "ab" * 32, "a/1\ta\t4\t0.25 0.75"]

    def test_unknown_version(self, tmp_path: Path) -> None:
        path = tmp_path / "index.txt"
        path.write_text("AVIIDX 9\n1 0 abc\n")
        with pytest.raises(FormatVersionError):
            load_index(path)

    def test_short_weight_list(self, tmp_path: Path) -> None:
        """An entry with k-1 weights names its line."""
        path = tmp_path / "index.txt"
        path.write_text("AVIIDX 1\n3 1 abc\na/1\ta\t2\t0.5 0.5\n")

        with pytest.raises(MalformedRecordError) as exc_info:
            load_index(path)

        assert exc_info.value.line_no == 3

    def test_entry_count_mismatch(self, tmp_path: Path) -> None:
        path = tmp_path / "index.txt"
        path.write_text("AVIIDX 1\n1 2 abc\na/1\ta\t1\t1\n")
        with pytest.raises(MalformedRecordError):
            load_index(path)

    def test_fingerprint_mismatch(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        """A foreign vocabulary is refused unless explicitly allowed."""
        vocab = Vocabulary(centroids=np.eye(4))
        path = tmp_path / "index.txt"
        save_index(_random_index(5, fingerprint="0" * 64), path)

        with pytest.raises(FingerprintMismatchError):
            load_index(path, vocab)

        with caplog.at_level(logging.WARNING):
            loaded = load_index(path, vocab, allow_mismatch=True)
        assert len(loaded) == 5
        assert "different vocabulary" in caplog.text

    def test_matching_vocabulary(self, tmp_path: Path) -> None:
        vocab = Vocabulary(centroids=np.eye(4))
        path = tmp_path / "index.txt"
        save_index(_random_index(5, fingerprint=vocab.fingerprint), path)

        assert load_index(path, vocab).vocab_fingerprint == vocab.fingerprint
