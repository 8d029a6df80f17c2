"""
Visual vocabulary: k-means over fused descriptors.

Centroids are seeded with k-means++ and refined by Lloyd iterations until
the relative centroid shift drops below `tol`. Descriptors are assigned to
the nearest centroid by squared Euclidean distance, ties going to the
lowest word index.
"""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from avifind.constants import FileFormats, KMeansDefaults
from avifind.core.exceptions import (
    ConfigValidationError,
    DescriptorError,
    DimensionMismatchError,
    FormatVersionError,
    InsufficientDescriptorsError,
    MalformedRecordError,
)
from avifind.utils.conversion import format_decimal, parse_float_field

logger = logging.getLogger(__name__)

# rows per assignment block
ASSIGN_CHUNK = 16384


@dataclass(frozen=True)
class TrainingMeta:
    """
    How a vocabulary was trained.

    Attributes:
        seed: k-means++ seed
        iterations: Lloyd update steps run (None when loaded from file)
        distortion: Final mean squared distance to the assigned centroid
        descriptor_count: Training descriptors used
        history: Distortion after every assignment step
    """

    seed: int
    iterations: int | None = None
    distortion: float | None = None
    descriptor_count: int | None = None
    history: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """
    k visual words of dimension d.

    Attributes:
        centroids: (k, d) finite float array
        train_meta: Training record
        file_digest: sha256 of the file the vocabulary was loaded from
    """

    centroids: np.ndarray
    train_meta: TrainingMeta = field(default_factory=lambda: TrainingMeta(seed=0))
    file_digest: str | None = None

    def __post_init__(self) -> None:
        c = self.centroids
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"centroids must be a non-empty (k, d) array, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("centroids must be finite")

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def d(self) -> int:
        return int(self.centroids.shape[1])

    @property
    def seed(self) -> int:
        return self.train_meta.seed

    def to_text(self) -> str:
        """Serialized file contents."""
        lines = [
            f"{FileFormats.VOCAB_MAGIC} {FileFormats.VOCAB_VERSION}",
            f"{self.k} {self.d} {self.seed}",
        ]
        lines.extend(" ".join(format_decimal(v) for v in row) for row in self.centroids.tolist())
        return "\n".join(lines) + "\n"

    @property
    def fingerprint(self) -> str:
        """sha256 hex digest of the vocabulary file bytes."""
        if self.file_digest is not None:
            return self.file_digest
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


# =============================================================================
# Assignment
# =============================================================================


def _check_dimension(data: np.ndarray, vocab: Vocabulary) -> None:
    if data.shape[-1] != vocab.d:
        raise DimensionMismatchError(vocab.d, int(data.shape[-1]))


def _nearest(data: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest centroid index and squared distance per row, computed in blocks."""
    labels = np.empty(data.shape[0], dtype=np.intp)
    dist = np.empty(data.shape[0], dtype=np.float64)
    for start in range(0, data.shape[0], ASSIGN_CHUNK):
        block = cdist(data[start : start + ASSIGN_CHUNK], centroids, "sqeuclidean")
        idx = np.argmin(block, axis=1)
        labels[start : start + idx.size] = idx
        dist[start : start + idx.size] = block[np.arange(idx.size), idx]
    return labels, dist


def assign_nearest(desc: np.ndarray, vocab: Vocabulary) -> int:
    """
    Index of the centroid nearest to one descriptor.

    Raises:
        DimensionMismatchError: If the descriptor length differs from vocab.d
    """
    vec = np.asarray(desc, dtype=np.float64).reshape(1, -1)
    _check_dimension(vec, vocab)
    return int(_nearest(vec, vocab.centroids)[0][0])


def assign_all(descriptors: np.ndarray, vocab: Vocabulary) -> np.ndarray:
    """Nearest word for every row of an (m, d) array."""
    data = np.asarray(descriptors, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError(f"expected an (m, d) array, got shape {data.shape}")
    if data.shape[0] == 0:
        return np.zeros(0, dtype=np.intp)
    _check_dimension(data, vocab)
    return _nearest(data, vocab.centroids)[0]


# =============================================================================
# Training
# =============================================================================


def _as_matrix(descriptors: np.ndarray | Sequence[np.ndarray]) -> np.ndarray:
    if isinstance(descriptors, np.ndarray):
        data = np.asarray(descriptors, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"expected an (m, d) array, got shape {data.shape}")
        return data
    rows = [np.asarray(v, dtype=np.float64).ravel() for v in descriptors]
    if not rows:
        return np.zeros((0, 0))
    dim = rows[0].size
    for row in rows:
        if row.size != dim:
            raise DimensionMismatchError(dim, row.size)
    return np.vstack(rows)


def _kmeans_plus_plus(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2-weighted seeding."""
    m = data.shape[0]
    centroids = np.empty((k, data.shape[1]))
    first = int(rng.integers(m))
    centroids[0] = data[first]
    closest = cdist(data, data[first : first + 1], "sqeuclidean")[:, 0]
    for c in range(1, k):
        total = float(closest.sum())
        idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
        if idx >= m or closest[idx] <= 0.0:
            idx = int(np.argmax(closest))
        centroids[c] = data[idx]
        np.minimum(closest, cdist(data, data[idx : idx + 1], "sqeuclidean")[:, 0], out=closest)
    return centroids


def _lloyd(
    data: np.ndarray,
    centroids: np.ndarray,
    max_iter: int,
    tol: float,
) -> Iterator[tuple[np.ndarray, float, float]]:
    """
    Lloyd iterations.

    Yields (centroids, distortion before the update, relative shift) per
    step. Empty clusters are moved to the point farthest from its centroid.
    """
    k = centroids.shape[0]
    for _ in range(max_iter):
        labels, dist = _nearest(data, centroids)
        distortion = float(dist.mean())

        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, data)
        updated = centroids.copy()
        filled = counts > 0
        updated[filled] = sums[filled] / counts[filled, None]

        remaining = dist.copy()
        for j in np.flatnonzero(~filled):
            far = int(np.argmax(remaining))
            updated[j] = data[far]
            remaining[far] = -1.0
            logger.debug("Re-seeded empty cluster %d from point %d", j, far)

        scale = float(np.linalg.norm(centroids))
        shift = float(np.linalg.norm(updated - centroids)) / (scale if scale > 0 else 1.0)
        centroids = updated
        yield centroids, distortion, shift
        if shift < tol:
            return


def subsample_descriptors(data: np.ndarray, limit: int | None, seed: int) -> np.ndarray:
    """Seeded uniform subsample of at most `limit` rows, original order kept."""
    if limit is None or data.shape[0] <= limit:
        return data
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(data.shape[0], size=limit, replace=False))
    logger.debug("Subsampled %d of %d training descriptors", limit, data.shape[0])
    return data[keep]


def train_kmeans(
    descriptors: np.ndarray | Sequence[np.ndarray],
    k: int = KMeansDefaults.K,
    seed: int = 0,
    max_iter: int = KMeansDefaults.MAX_ITER,
    tol: float = KMeansDefaults.TOL,
) -> Vocabulary:
    """
    Train a k-word vocabulary.

    Args:
        descriptors: (m, d) array or sequence of equal-length vectors
        k: Number of visual words
        seed: Seed of the k-means++ initialisation
        max_iter: Maximum Lloyd update steps
        tol: Stop once ||C_new - C||_F / ||C||_F falls below this

    Raises:
        InsufficientDescriptorsError: If k exceeds the distinct descriptor count
        DimensionMismatchError: If the vectors differ in length
    """
    if k < 1:
        raise ConfigValidationError("k", k, "must be at least 1")
    if max_iter < 1:
        raise ConfigValidationError("max_iter", max_iter, "must be at least 1")

    data = _as_matrix(descriptors)
    if data.shape[0] == 0:
        raise InsufficientDescriptorsError(k, 0)
    if not np.all(np.isfinite(data)):
        raise DescriptorError("Training descriptors contain non-finite values")
    distinct = int(np.unique(data, axis=0).shape[0])
    if k > distinct:
        raise InsufficientDescriptorsError(k, distinct)

    rng = np.random.default_rng(seed)
    centroids = _kmeans_plus_plus(data, k, rng)

    history: list[float] = []
    iterations = 0
    for centroids, distortion, shift in _lloyd(data, centroids, max_iter, tol):
        iterations += 1
        history.append(distortion)
        logger.debug("k-means iteration %d: distortion %.6g, shift %.3g", iterations, distortion, shift)

    final = float(_nearest(data, centroids)[1].mean())
    history.append(final)
    logger.info(
        "Trained %d words on %d descriptors in %d iterations (distortion %.6g)",
        k,
        data.shape[0],
        iterations,
        final,
    )
    meta = TrainingMeta(
        seed=seed,
        iterations=iterations,
        distortion=final,
        descriptor_count=int(data.shape[0]),
        history=tuple(history),
    )
    return Vocabulary(centroids=centroids, train_meta=meta)


# =============================================================================
# Persistence
# =============================================================================


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> str:
    """
    Write the vocabulary file.

    The `k d seed` header records the seed k-means ran with. Commands train
    with SeedPlan.kmeans, the pipeline seed plus one, so `--seed 0` writes 1.

    Returns:
        Fingerprint of the written bytes
    """
    payload = vocab.to_text().encode("utf-8")
    Path(path).write_bytes(payload)
    return hashlib.sha256(payload).hexdigest()


def load_vocabulary(path: str | Path) -> Vocabulary:
    """
    Read a vocabulary file.

    Raises:
        FormatVersionError: On a wrong magic token or version
        MalformedRecordError: On bad header fields or centroid rows
    """
    file_path = Path(path)
    payload = file_path.read_bytes()
    where = str(file_path)
    try:
        lines = payload.decode("utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise MalformedRecordError(where, 1, f"not UTF-8 text: {e.reason}") from None

    expected = f"{FileFormats.VOCAB_MAGIC} {FileFormats.VOCAB_VERSION}"
    found = lines[0].strip() if lines else ""
    if found != expected:
        raise FormatVersionError(where, found, expected)

    if len(lines) < 2:
        raise MalformedRecordError(where, 2, "missing 'k d seed' header")
    try:
        k, d, seed = (int(tok) for tok in lines[1].split())
    except ValueError:
        raise MalformedRecordError(where, 2, "expected 'k d seed'") from None
    if k < 1 or d < 1:
        raise MalformedRecordError(where, 2, "k and d must be positive")

    rows = lines[2:]
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != k:
        raise MalformedRecordError(where, 3 + min(len(rows), k), f"expected {k} centroid rows, found {len(rows)}")

    centroids = np.empty((k, d))
    for i, line in enumerate(rows):
        line_no = i + 3
        tokens = line.split()
        if len(tokens) != d:
            raise MalformedRecordError(where, line_no, f"expected {d} values, found {len(tokens)}")
        try:
            centroids[i] = [parse_float_field(tok) for tok in tokens]
        except ValueError as e:
            raise MalformedRecordError(where, line_no, str(e)) from None

    digest = hashlib.sha256(payload).hexdigest()
    logger.debug("Loaded vocabulary k=%d d=%d from %s", k, d, file_path)
    return Vocabulary(centroids=centroids, train_meta=TrainingMeta(seed=seed), file_digest=digest)
