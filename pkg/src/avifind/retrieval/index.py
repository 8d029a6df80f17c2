"""
Bag-of-words index and ranked retrieval.

Each image's descriptors are quantized against the vocabulary into an
L1-normalized word histogram. Queries scan the whole index by L1
distance; equal distances are ordered by image id.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from avifind.constants import FileFormats
from avifind.core.exceptions import (
    ConfigValidationError,
    DimensionMismatchError,
    DuplicateImageIdError,
    EmptyIndexError,
    FingerprintMismatchError,
    FormatVersionError,
    MalformedRecordError,
)
from avifind.features.descriptors import DescriptorSet, describe_image
from avifind.features.imaging import RasterImage
from avifind.models.params import DescriptorConfig
from avifind.retrieval.vocabulary import Vocabulary, assign_all
from avifind.utils.conversion import format_decimal, parse_float_field
from avifind.utils.sanitize import validate_image_id

logger = logging.getLogger(__name__)


# =============================================================================
# Types
# =============================================================================


@dataclass(frozen=True, eq=False)
class BowHistogram:
    """
    Word histogram of one image.

    Attributes:
        weights: k non-negative values summing to 1, or all zero
        raw_count: Number of descriptors quantized
    """

    weights: np.ndarray
    raw_count: int = 0

    def __post_init__(self) -> None:
        if self.weights.ndim != 1 or self.weights.size < 1:
            raise ValueError("weights must be a non-empty vector")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite and non-negative")
        if self.raw_count < 0:
            raise ValueError("raw_count must be non-negative")

    @property
    def k(self) -> int:
        return int(self.weights.size)

    @property
    def is_empty(self) -> bool:
        return self.raw_count == 0

    @classmethod
    def zeros(cls, k: int) -> BowHistogram:
        return cls(weights=np.zeros(k), raw_count=0)


@dataclass(frozen=True, eq=False)
class IndexEntry:
    """One indexed image."""

    image_id: str
    label: str
    bow: BowHistogram

    @property
    def flagged(self) -> bool:
        """True when the image contributed no descriptors."""
        return self.bow.is_empty


class RankedHit(NamedTuple):
    image_id: str
    label: str
    distance: float


@dataclass(frozen=True)
class RetrievalResult:
    """
    Ranked answer to one query.

    Attributes:
        query_id: Identifier of the query, if known
        ranked: Hits by ascending distance, ties by image id
    """

    query_id: str | None
    ranked: list[RankedHit] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ranked)

    @property
    def labels(self) -> list[str]:
        return [hit.label for hit in self.ranked]


@dataclass(frozen=True, eq=False)
class BowIndex:
    """
    Immutable collection of image histograms built against one vocabulary.

    Attributes:
        vocab_fingerprint: Fingerprint of the vocabulary file
        k: Histogram length
        entries: Entries in build order
    """

    vocab_fingerprint: str
    k: int
    entries: list[IndexEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            if entry.image_id in seen:
                raise DuplicateImageIdError(entry.image_id)
            seen.add(entry.image_id)
            if entry.bow.k != self.k:
                raise DimensionMismatchError(self.k, entry.bow.k, what="histogram")

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def matrix(self) -> np.ndarray:
        """(n, k) weights, one row per entry."""
        if not self.entries:
            return np.zeros((0, self.k))
        return np.vstack([e.bow.weights for e in self.entries])

    @cached_property
    def id_rank(self) -> np.ndarray:
        """Position of each entry's image id in sorted id order."""
        order = sorted(range(len(self.entries)), key=lambda i: self.entries[i].image_id)
        rank = np.empty(len(self.entries), dtype=np.intp)
        rank[order] = np.arange(len(order))
        return rank

    @cached_property
    def empty_mask(self) -> np.ndarray:
        """True for entries whose histogram is all zero."""
        return np.array([e.flagged for e in self.entries], dtype=bool)

    def labels(self) -> list[str]:
        """Label of every entry, in entry order."""
        return [e.label for e in self.entries]

    def class_counts(self) -> dict[str, int]:
        """Entries per label."""
        return dict(sorted(Counter(self.labels()).items()))

    def position(self, image_id: str) -> int | None:
        for i, entry in enumerate(self.entries):
            if entry.image_id == image_id:
                return i
        return None


# =============================================================================
# Quantization and Distance
# =============================================================================


def quantize(ds: DescriptorSet, vocab: Vocabulary) -> BowHistogram:
    """
    Word histogram of a descriptor set.

    Raises:
        DimensionMismatchError: If the descriptor dimension differs from vocab.d
    """
    if ds.dimension != vocab.d:
        raise DimensionMismatchError(vocab.d, ds.dimension)
    if ds.is_empty:
        return BowHistogram.zeros(vocab.k)
    words = assign_all(ds.matrix, vocab)
    counts = np.bincount(words, minlength=vocab.k)
    return BowHistogram(weights=counts / words.size, raw_count=int(words.size))


def bow_distance(a: BowHistogram, b: BowHistogram) -> float:
    """
    L1 distance between two histograms, in [0, 2] for normalized inputs.

    Raises:
        DimensionMismatchError: If the histograms differ in length
    """
    if a.k != b.k:
        raise DimensionMismatchError(a.k, b.k, what="histogram")
    return float(cdist(a.weights[None, :], b.weights[None, :], "cityblock")[0, 0])


# =============================================================================
# Building
# =============================================================================


def index_descriptor_sets(
    labelled: Sequence[tuple[str, DescriptorSet]],
    vocab: Vocabulary,
) -> BowIndex:
    """
    Quantize already-described images into an index.

    Args:
        labelled: (label, descriptor set) pairs; image ids come from the sets
        vocab: Vocabulary to quantize against

    Raises:
        DuplicateImageIdError: If two sets share an image id
        DimensionMismatchError: If descriptor and vocabulary dimensions differ
    """
    entries = []
    for label, ds in labelled:
        validate_image_id(ds.image_id)
        validate_image_id(label)
        entries.append(IndexEntry(image_id=ds.image_id, label=label, bow=quantize(ds, vocab)))

    index = BowIndex(vocab_fingerprint=vocab.fingerprint, k=vocab.k, entries=entries)
    flagged = [e.image_id for e in entries if e.flagged]
    if flagged:
        logger.warning("%d indexed image(s) have empty histograms", len(flagged))
        logger.debug("Flagged images: %s", ", ".join(flagged))
    return index


def build_index(
    images: Sequence[tuple[str, str, RasterImage]],
    vocab: Vocabulary,
    config: DescriptorConfig,
) -> BowIndex:
    """
    Describe and quantize decoded images.

    Args:
        images: (image_id, label, image) triples
        vocab: Vocabulary matching config.dimension
        config: Descriptor settings

    Raises:
        ConfigValidationError: If no images are given
        DuplicateImageIdError: If an image id repeats
        DimensionMismatchError: If config and vocabulary dimensions differ
    """
    if not images:
        raise ConfigValidationError("images", 0, "at least one image is required")
    if config.dimension != vocab.d:
        raise DimensionMismatchError(vocab.d, config.dimension)
    counts = Counter(image_id for image_id, _, _ in images)
    for image_id, seen in counts.items():
        if seen > 1:
            raise DuplicateImageIdError(image_id)

    labelled = [
        (label, describe_image(img, config, image_id=image_id)) for image_id, label, img in images
    ]
    return index_descriptor_sets(labelled, vocab)


# =============================================================================
# Querying
# =============================================================================


def _ordering(distances: np.ndarray, index: BowIndex, query_empty: bool) -> np.ndarray:
    """
    Indices sorted by distance, then by image id.

    Entries with empty histograms go last unless the query is empty too.
    """
    if query_empty:
        return np.lexsort((index.id_rank, distances))
    return np.lexsort((index.id_rank, distances, index.empty_mask))


def query(
    q_bow: BowHistogram,
    index: BowIndex,
    top_m: int,
    exclude_id: str | None = None,
    query_id: str | None = None,
) -> RetrievalResult:
    """
    Rank indexed images by L1 distance to a query histogram.

    Images without descriptors rank after every other image; their
    distance is reported as computed.

    Args:
        q_bow: Query histogram
        index: Index to scan
        top_m: Number of hits to return (clamped to the index size)
        exclude_id: Image id left out of the candidates
        query_id: Identifier recorded in the result

    Raises:
        EmptyIndexError: If the index has no entries
        DimensionMismatchError: If the query length differs from index.k
    """
    if not index.entries:
        raise EmptyIndexError()
    if top_m < 1:
        raise ConfigValidationError("top_m", top_m, "must be at least 1")
    if q_bow.k != index.k:
        raise DimensionMismatchError(index.k, q_bow.k, what="histogram")

    distances = cdist(q_bow.weights[None, :], index.matrix, "cityblock")[0]
    order = _ordering(distances, index, q_bow.is_empty)
    ranked: list[RankedHit] = []
    for i in order:
        entry = index.entries[i]
        if entry.image_id == exclude_id:
            continue
        ranked.append(RankedHit(entry.image_id, entry.label, float(distances[i])))
        if len(ranked) == top_m:
            break
    return RetrievalResult(query_id=query_id, ranked=ranked)


def iter_rankings(
    index: BowIndex,
    exclude_self: bool = True,
    block: int = 512,
) -> Iterator[tuple[int, np.ndarray]]:
    """
    Full ranking of every entry queried against the whole index.

    Yields (entry position, candidate positions in rank order). With
    exclude_self the query's own position is left out.
    """
    if not index.entries:
        raise EmptyIndexError()
    matrix = index.matrix
    for start in range(0, len(index), block):
        distances = cdist(matrix[start : start + block], matrix, "cityblock")
        for offset, row in enumerate(distances):
            pos = start + offset
            order = _ordering(row, index, bool(index.empty_mask[pos]))
            if exclude_self:
                order = order[order != pos]
            yield pos, order


# =============================================================================
# Persistence
# =============================================================================


def save_index(index: BowIndex, path: str | Path) -> None:
    """Write the index file."""
    lines = [
        f"{FileFormats.INDEX_MAGIC} {FileFormats.INDEX_VERSION}",
        f"{index.k} {len(index)} {index.vocab_fingerprint}",
    ]
    for entry in index.entries:
        weights = " ".join(format_decimal(w) for w in entry.bow.weights.tolist())
        lines.append(f"{entry.image_id}\t{entry.label}\t{entry.bow.raw_count}\t{weights}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    logger.debug("Wrote %d index entries to %s", len(index), path)


def _parse_entry(where: str, line_no: int, line: str, k: int) -> IndexEntry:
    fields = line.split("\t")
    if len(fields) != 4:
        raise MalformedRecordError(where, line_no, f"expected 4 TAB-separated fields, found {len(fields)}")
    image_id, label, raw, weights = fields
    if not image_id or not label:
        raise MalformedRecordError(where, line_no, "empty image id or label")
    try:
        raw_count = int(raw)
    except ValueError:
        raise MalformedRecordError(where, line_no, f"bad descriptor count {raw!r}") from None
    tokens = weights.split()
    if len(tokens) != k:
        raise MalformedRecordError(where, line_no, f"expected {k} weights, found {len(tokens)}")
    try:
        values = np.array([parse_float_field(tok) for tok in tokens])
        bow = BowHistogram(weights=values, raw_count=raw_count)
    except ValueError as e:
        raise MalformedRecordError(where, line_no, str(e)) from None
    return IndexEntry(image_id=image_id, label=label, bow=bow)


def load_index(
    path: str | Path,
    vocab: Vocabulary | None = None,
    allow_mismatch: bool = False,
) -> BowIndex:
    """
    Read an index file, optionally checking it against a vocabulary.

    Args:
        path: Index file
        vocab: Vocabulary the index should have been built with
        allow_mismatch: Log a warning instead of raising on a fingerprint mismatch

    Raises:
        FormatVersionError: On a wrong magic token or version
        MalformedRecordError: On bad header fields or entry lines
        FingerprintMismatchError: If vocab was built from a different file
        DimensionMismatchError: If vocab.k differs from the index k
    """
    file_path = Path(path)
    where = str(file_path)
    try:
        lines = file_path.read_bytes().decode("utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise MalformedRecordError(where, 1, f"not UTF-8 text: {e.reason}") from None

    expected = f"{FileFormats.INDEX_MAGIC} {FileFormats.INDEX_VERSION}"
    found = lines[0].strip() if lines else ""
    if found != expected:
        raise FormatVersionError(where, found, expected)

    header = lines[1].split() if len(lines) > 1 else []
    if len(header) != 3:
        raise MalformedRecordError(where, 2, "expected 'k n_entries fingerprint'")
    try:
        k, n_entries = int(header[0]), int(header[1])
    except ValueError:
        raise MalformedRecordError(where, 2, "k and n_entries must be integers") from None
    if k < 1 or n_entries < 0:
        raise MalformedRecordError(where, 2, "k must be positive and n_entries non-negative")
    fingerprint = header[2]

    records = lines[2:]
    while records and not records[-1].strip():
        records.pop()
    entries = [_parse_entry(where, i + 3, line, k) for i, line in enumerate(records)]
    if len(entries) != n_entries:
        raise MalformedRecordError(
            where, 3 + len(entries), f"header announces {n_entries} entries, found {len(entries)}"
        )

    if vocab is not None:
        if vocab.k != k:
            raise DimensionMismatchError(k, vocab.k, what="vocabulary")
        if vocab.fingerprint != fingerprint:
            if not allow_mismatch:
                raise FingerprintMismatchError(fingerprint, vocab.fingerprint)
            logger.warning(
                "Index %s was built with a different vocabulary (%s != %s); continuing",
                file_path.name,
                fingerprint[:12],
                vocab.fingerprint[:12],
            )

    logger.debug("Loaded %d index entries (k=%d) from %s", len(entries), k, file_path)
    return BowIndex(vocab_fingerprint=fingerprint, k=k, entries=entries)
