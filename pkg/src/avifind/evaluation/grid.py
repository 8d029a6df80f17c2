"""
Evaluation grid over vocabulary size, contour density and descriptor variant.

For every (k, n, variant) cell a vocabulary is trained on the corpus
descriptors, the corpus is indexed, and every image is queried against
the index. Descriptors are extracted once per (n, seed); the fused and
shape-only variants differ only in the weight of the color block.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from io import StringIO
from pathlib import Path

import numpy as np

from avifind.constants import CURVE_CSV_HEADER, RECALL_LEVELS
from avifind.core.config import PipelineConfig, SeedPlan
from avifind.core.exceptions import AvifindError, EvaluationError
from avifind.evaluation.metrics import curve_arrays, interpolate_curve
from avifind.features.descriptors import DescriptorSet, reweight_color
from avifind.features.pipeline import describe_sources
from avifind.models.corpus import CorpusManifest
from avifind.retrieval.index import BowIndex, index_descriptor_sets, iter_rankings
from avifind.retrieval.vocabulary import subsample_descriptors, train_kmeans
from avifind.utils.conversion import format_decimal

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int], None]


class Variant(str, Enum):
    """Descriptor variant of a grid cell."""

    FUSED = "fused"
    SHAPE = "shape"

    @classmethod
    def parse(cls, value: str | Variant) -> Variant:
        """Accept `fused`, `shape`, `shape_only` or `shape-only`."""
        if isinstance(value, Variant):
            return value
        key = value.strip().lower().replace("-", "_")
        if key == "shape_only":
            key = "shape"
        try:
            return cls(key)
        except ValueError:
            raise EvaluationError(f"Unknown variant '{value}' (expected fused or shape)") from None


class Protocol(str, Enum):
    """Whether the query image stays in its own candidate list."""

    LEAVE_ONE_OUT = "leave-one-out"
    IN_PLACE = "in-place"


# =============================================================================
# Report
# =============================================================================


@dataclass
class CellResult:
    """
    Outcome of one (k, n, variant) cell, averaged over seeds.

    Attributes:
        mean_precision: Mean precision at top_m over all queries; nan on failure
        queries: Queries evaluated (summed over seeds)
        failures: Images excluded as queries because they had no descriptors
        per_query: Mean precision at top_m per query image
        class_curves: Mean interpolated precision at RECALL_LEVELS per class
        curve: Mean interpolated precision at RECALL_LEVELS over all queries
        error: Failure message when the cell could not be computed
    """

    k: int
    n: int
    variant: Variant
    mean_precision: float = math.nan
    queries: int = 0
    failures: int = 0
    per_query: dict[str, float] = field(default_factory=dict)
    class_curves: dict[str, np.ndarray] = field(default_factory=dict)
    curve: np.ndarray = field(default_factory=lambda: np.zeros(len(RECALL_LEVELS)))
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class EvalReport:
    """
    Grid results plus the settings that produced them.

    Cells are ordered by k, then n, then variant, each in the order given.
    """

    cells: list[CellResult]
    top_m: int
    protocol: Protocol
    seeds: tuple[int, ...]
    config: PipelineConfig

    def cell(self, k: int, n: int, variant: Variant | str) -> CellResult:
        v = Variant.parse(variant)
        for c in self.cells:
            if c.k == k and c.n == n and c.variant == v:
                return c
        raise KeyError((k, n, v.value))

    @property
    def grid(self) -> dict[tuple[int, int, str], float]:
        """Mean precision per (k, n, variant)."""
        return {(c.k, c.n, c.variant.value): c.mean_precision for c in self.cells}

    def averages(self) -> dict[tuple[int, str], float]:
        """Mean precision per (k, variant), averaged over n; failed cells are skipped."""
        buckets: dict[tuple[int, str], list[float]] = defaultdict(list)
        for c in self.cells:
            buckets[(c.k, c.variant.value)].append(c.mean_precision)
        out = {}
        for key, values in buckets.items():
            finite = [v for v in values if not math.isnan(v)]
            out[key] = sum(finite) / len(finite) if finite else math.nan
        return out

    def to_csv(self) -> str:
        """Grid as CSV, one row per cell."""
        buffer = StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["k", "n", "variant", f"mean_precision_at_{self.top_m}", "queries", "failures"])
        for c in self.cells:
            writer.writerow(
                [c.k, c.n, c.variant.value, format_decimal(c.mean_precision), c.queries, c.failures]
            )
        return buffer.getvalue()

    def curves_csv(self, n: int | None = None) -> str:
        """
        Mean interpolated precision per (variant, k) at each recall level.

        Uses the cells of the given n, by default the largest n in the grid.
        """
        buffer = StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CURVE_CSV_HEADER.split(","))
        if not self.cells:
            return buffer.getvalue()
        chosen = max(c.n for c in self.cells) if n is None else n
        variants = list(dict.fromkeys(c.variant for c in self.cells))
        for variant in variants:
            for c in self.cells:
                if c.n != chosen or c.variant != variant or not c.ok:
                    continue
                for level, value in zip(RECALL_LEVELS, c.curve.tolist()):
                    writer.writerow([variant.value, c.k, f"{level:.1f}", format_decimal(value)])
        return buffer.getvalue()

    def write(self, report_path: str | Path, curves_path: str | Path | None = None) -> None:
        Path(report_path).write_bytes(self.to_csv().encode("utf-8"))
        if curves_path is not None:
            Path(curves_path).write_bytes(self.curves_csv().encode("utf-8"))


# =============================================================================
# Cell Evaluation
# =============================================================================


@dataclass
class _CellAccumulator:
    precisions: list[float] = field(default_factory=list)
    per_query: dict[str, list[float]] = field(default_factory=lambda: defaultdict(list))
    class_curves: dict[str, list[np.ndarray]] = field(default_factory=lambda: defaultdict(list))
    failures: int = 0


def evaluate_index(
    index: BowIndex,
    top_m: int,
    protocol: Protocol = Protocol.LEAVE_ONE_OUT,
) -> tuple[dict[str, float], dict[str, np.ndarray], int]:
    """
    Query every non-empty entry of an index against the index.

    Returns:
        (precision at top_m per query id, interpolated curve per query id,
        number of entries skipped for having no descriptors)
    """
    if top_m < 1:
        raise EvaluationError(f"Cutoff must be at least 1, got {top_m}")
    labels = np.array(index.labels(), dtype=object)
    class_sizes = index.class_counts()
    exclude_self = protocol == Protocol.LEAVE_ONE_OUT

    precisions: dict[str, float] = {}
    curves: dict[str, np.ndarray] = {}
    skipped = 0
    for pos, order in iter_rankings(index, exclude_self=exclude_self):
        entry = index.entries[pos]
        if entry.flagged:
            skipped += 1
            continue
        relevance = labels[order] == entry.label
        cutoff = min(top_m, relevance.size)
        if cutoff == 0:
            continue
        precisions[entry.image_id] = float(relevance[:cutoff].sum()) / cutoff
        total = class_sizes[entry.label] - (1 if exclude_self else 0)
        if total >= 1:
            precision, recall = curve_arrays(relevance, total)
            curves[entry.image_id] = interpolate_curve(precision, recall)
    return precisions, curves, skipped


def _check_corpus(manifest: CorpusManifest) -> None:
    counts = manifest.class_counts()
    if len(counts) < 2:
        raise EvaluationError("Evaluation needs at least 2 classes", context={"classes": len(counts)})
    small = [label for label, count in counts.items() if count < 2]
    if small:
        raise EvaluationError(
            "Every class needs at least 2 images", context={"classes": ", ".join(small[:5])}
        )


def _training_matrix(sets: Sequence[DescriptorSet], dimension: int) -> np.ndarray:
    blocks = [ds.matrix for ds in sets if not ds.is_empty]
    return np.vstack(blocks) if blocks else np.zeros((0, dimension))


def run_grid(
    manifest: CorpusManifest,
    k_values: Sequence[int],
    n_values: Sequence[int],
    variants: Sequence[Variant | str] = (Variant.FUSED, Variant.SHAPE),
    seeds: Sequence[int] | None = None,
    config: PipelineConfig | None = None,
    top_m: int | None = None,
    protocol: Protocol | str = Protocol.LEAVE_ONE_OUT,
    jobs: int = 1,
    on_progress: ProgressCallback | None = None,
) -> EvalReport:
    """
    Evaluate every (k, n, variant) combination.

    The shape-only variant is the fused descriptor with color weight 0.
    A failing cell is recorded with its error and nan precision; the grid
    continues.

    Args:
        manifest: Labelled corpus
        k_values: Vocabulary sizes
        n_values: Contour point counts
        variants: Descriptor variants
        seeds: Seeds to average over (default: config.seed)
        config: Remaining pipeline settings
        top_m: Precision cutoff (default: config.top_m)
        protocol: Leave-one-out or in-place querying
        jobs: Worker processes for descriptor extraction
        on_progress: Called with 1 after each described image

    Raises:
        EvaluationError: If the corpus has fewer than 2 classes or a class
            has fewer than 2 images, or a grid axis is empty
    """
    config = config or PipelineConfig()
    cutoff = config.top_m if top_m is None else top_m
    seed_list = tuple(seeds) if seeds else (config.seed,)
    chosen = [Variant.parse(v) for v in variants]
    proto = Protocol(protocol)
    if not k_values or not n_values or not chosen:
        raise EvaluationError("k values, n values and variants must all be non-empty")
    if cutoff < 1:
        raise EvaluationError(f"Cutoff must be at least 1, got {cutoff}")
    _check_corpus(manifest)

    sources = [(e.image_id, e.path) for e in manifest.entries]
    labels = [e.label for e in manifest.entries]
    label_of = {e.image_id: e.label for e in manifest.entries}
    acc: dict[tuple[int, int, Variant], _CellAccumulator] = defaultdict(_CellAccumulator)
    errors: dict[tuple[int, int, Variant], str] = {}

    for seed in seed_list:
        plan = SeedPlan.from_seed(seed)
        seeded = config.model_copy(update={"seed": seed})
        for n in n_values:
            desc_config = seeded.descriptor_config(n=n)
            logger.info("Describing %d images (n=%d, seed=%d)", len(sources), n, seed)
            described = describe_sources(sources, desc_config, jobs=jobs, on_progress=on_progress)

            for variant in chosen:
                weight = config.color_weight if variant == Variant.FUSED else 0.0
                sets = [reweight_color(ds, weight, config.second_moment) for ds in described]
                training = subsample_descriptors(
                    _training_matrix(sets, desc_config.dimension),
                    config.max_train_descriptors,
                    plan.subsample,
                )
                for k in k_values:
                    key = (k, n, variant)
                    if key in errors:
                        continue
                    try:
                        vocab = train_kmeans(
                            training, k=k, seed=plan.kmeans, max_iter=config.max_iter, tol=config.tol
                        )
                        index = index_descriptor_sets(list(zip(labels, sets)), vocab)
                        precisions, curves, skipped = evaluate_index(index, cutoff, proto)
                    except (AvifindError, ValueError) as e:
                        logger.warning("Cell k=%d n=%d %s failed: %s", k, n, variant.value, e)
                        errors[key] = str(e)
                        continue
                    cell = acc[key]
                    cell.failures += skipped
                    if precisions:
                        cell.precisions.append(sum(precisions.values()) / len(precisions))
                    for image_id, value in precisions.items():
                        cell.per_query[image_id].append(value)
                    for image_id, curve in curves.items():
                        cell.class_curves[label_of[image_id]].append(curve)

    cells = []
    for k in k_values:
        for n in n_values:
            for variant in chosen:
                key = (k, n, variant)
                cells.append(_finish_cell(key, acc.get(key), errors.get(key), len(sources)))

    return EvalReport(
        cells=cells,
        top_m=cutoff,
        protocol=proto,
        seeds=seed_list,
        config=config,
    )


def _finish_cell(
    key: tuple[int, int, Variant],
    acc: _CellAccumulator | None,
    error: str | None,
    corpus_size: int,
) -> CellResult:
    k, n, variant = key
    if error is not None or acc is None:
        return CellResult(k=k, n=n, variant=variant, failures=corpus_size, error=error or "no result")

    per_query = {i: sum(v) / len(v) for i, v in acc.per_query.items()}
    all_curves = [c for curves in acc.class_curves.values() for c in curves]
    return CellResult(
        k=k,
        n=n,
        variant=variant,
        mean_precision=sum(acc.precisions) / len(acc.precisions) if acc.precisions else math.nan,
        queries=sum(len(v) for v in acc.per_query.values()),
        failures=acc.failures,
        per_query=per_query,
        class_curves={label: np.mean(c, axis=0) for label, c in sorted(acc.class_curves.items())},
        curve=np.mean(all_curves, axis=0) if all_curves else np.zeros(len(RECALL_LEVELS)),
    )
