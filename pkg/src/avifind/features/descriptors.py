"""
Shape-context and color-moment descriptors.

Every keypoint of an image is described by a log-polar histogram of the
sampled contour points around it (radii normalized by the mean pairwise
contour distance) followed by the mean and second moment of each color
channel in a 5x5 window. The two blocks are concatenated with a weight on
the color part.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.spatial.distance import pdist

from avifind.constants import COLOR_MOMENT_COUNT, COLOR_WINDOW, TANGENT_NEIGHBOURS
from avifind.core.exceptions import (
    ConfigValidationError,
    DimensionMismatchError,
    EmptyContourError,
    HistogramConservationError,
    ImageTooSmallError,
)
from avifind.features.imaging import (
    ContourSet,
    RasterImage,
    detect_edges,
    resize_to_max_side,
    sample_contour,
    to_grayscale,
)
from avifind.features.keypoints import Keypoint, detect_keypoints
from avifind.models.params import DescriptorConfig, SecondMoment, ShapeContextParams

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# angles this close below 2*pi are folded onto 0
_ANGLE_WRAP_EPS = 1e-9


class EmptyReason(str, Enum):
    """Why an image produced no descriptors."""

    NO_CONTOUR = "no_contour"
    NO_KEYPOINTS = "no_keypoints"
    TOO_SMALL = "too_small"
    UNREADABLE = "unreadable"


# =============================================================================
# Types
# =============================================================================


@dataclass(frozen=True)
class LogPolarCoord:
    """
    Position of a point relative to a reference, in log-polar form.

    Attributes:
        log_r: Natural log of the normalized radial distance
        theta: Angle in [0, 2*pi)
    """

    log_r: float
    theta: float


@dataclass(frozen=True, eq=False)
class ShapeContext:
    """
    Log-polar histogram of contour points around one reference.

    Attributes:
        counts: L non-negative integer bin counts, index radial * A + angular
        ref_point: (x, y) of the reference
        alpha: Normalizing mean pairwise distance
        outside: Points at or beyond r_max
        at_ref: Points coinciding with the reference
    """

    counts: np.ndarray
    ref_point: tuple[float, float]
    alpha: float
    outside: int = 0
    at_ref: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def degenerate(self) -> bool:
        """True when no contour point landed in any bin."""
        return self.total == 0


@dataclass(frozen=True)
class ColorMoments:
    """
    Per-channel mean and population variance, channels scaled to [0, 1].
    """

    mean_r: float
    mean_g: float
    mean_b: float
    var_r: float
    var_g: float
    var_b: float

    @property
    def means(self) -> np.ndarray:
        return np.array([self.mean_r, self.mean_g, self.mean_b])

    @property
    def variances(self) -> np.ndarray:
        return np.array([self.var_r, self.var_g, self.var_b])

    def as_vector(self, second_moment: SecondMoment = "variance") -> np.ndarray:
        """Means followed by variances, or standard deviations when asked."""
        second = self.variances if second_moment == "variance" else np.sqrt(self.variances)
        return np.concatenate([self.means, second])


@dataclass(frozen=True, eq=False)
class FusedDescriptor:
    """
    One keypoint's shape context concatenated with its color moments.

    Attributes:
        vector: L + 6 values; L1-normalized histogram then weighted moments
        keypoint: Originating keypoint, if any
        moments: Unweighted color moments, kept for re-weighting
    """

    vector: np.ndarray
    keypoint: Keypoint | None = None
    moments: ColorMoments | None = None

    @property
    def shape_part(self) -> np.ndarray:
        return self.vector[:-COLOR_MOMENT_COUNT]

    @property
    def color_part(self) -> np.ndarray:
        return self.vector[-COLOR_MOMENT_COUNT:]


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """
    All descriptors of one image.

    Attributes:
        image_id: Identifier of the image
        dimension: Length of every descriptor vector
        descriptors: One FusedDescriptor per keypoint
        empty_reason: Set when the image yielded no descriptors
    """

    image_id: str
    dimension: int
    descriptors: list[FusedDescriptor] = field(default_factory=list)
    empty_reason: EmptyReason | None = None

    def __post_init__(self) -> None:
        for desc in self.descriptors:
            if desc.vector.shape != (self.dimension,):
                raise DimensionMismatchError(self.dimension, int(desc.vector.size))

    def __len__(self) -> int:
        return len(self.descriptors)

    @property
    def is_empty(self) -> bool:
        return not self.descriptors

    @property
    def matrix(self) -> np.ndarray:
        """(m, d) array of descriptor vectors; (0, d) when empty."""
        if not self.descriptors:
            return np.zeros((0, self.dimension))
        return np.vstack([d.vector for d in self.descriptors])

    @classmethod
    def empty(cls, image_id: str, dimension: int, reason: EmptyReason) -> DescriptorSet:
        return cls(image_id=image_id, dimension=dimension, empty_reason=reason)


# =============================================================================
# Shape Context
# =============================================================================


def _as_points(contour: ContourSet | np.ndarray) -> np.ndarray:
    if isinstance(contour, ContourSet):
        return contour.points
    return np.asarray(contour, dtype=np.float64).reshape(-1, 2)


def mean_pairwise_distance(contour: ContourSet | np.ndarray) -> float:
    """
    Mean Euclidean distance over all n^2 ordered point pairs.

    Self-pairs contribute zero terms, so alpha = 2 * sum_{i<j} d_ij / n^2.

    Raises:
        ConfigValidationError: If fewer than 2 points are given
    """
    pts = _as_points(contour)
    n = pts.shape[0]
    if n < 2:
        raise ConfigValidationError("contour", n, "at least 2 points are required")
    return float(2.0 * pdist(pts).sum() / (n * n))


def _bin_indices(
    offsets: np.ndarray,
    ref_dir: float,
    alpha: float,
    params: ShapeContextParams,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Bin index of each (dx, dy) offset.

    Returns:
        (index, outside, at_ref); index is only meaningful where both
        masks are False
    """
    dist = np.hypot(offsets[:, 0], offsets[:, 1])
    at_ref = dist == 0.0
    r = dist / alpha
    outside = ~at_ref & (r >= params.r_max)

    radial = np.searchsorted(params.radial_edges, r, side="right") - 1
    radial = np.clip(radial, 0, params.radial_bins - 1)

    theta = np.arctan2(offsets[:, 1], offsets[:, 0])
    if params.rotation_invariant:
        theta = theta - ref_dir
    theta = np.mod(theta, TWO_PI)
    theta[theta >= TWO_PI - _ANGLE_WRAP_EPS] = 0.0
    angular = np.floor(theta * params.angular_bins / TWO_PI).astype(np.intp)
    angular = np.clip(angular, 0, params.angular_bins - 1)

    return radial * params.angular_bins + angular, outside, at_ref


def log_polar_coord(
    q: Sequence[float],
    ref: Sequence[float],
    ref_dir: float,
    alpha: float,
    rotation_invariant: bool = False,
) -> LogPolarCoord:
    """
    Log-polar coordinates of q around ref.

    log_r is -inf when q coincides with ref.
    """
    dx, dy = q[0] - ref[0], q[1] - ref[1]
    r = math.hypot(dx, dy) / alpha
    theta = math.atan2(dy, dx) - (ref_dir if rotation_invariant else 0.0)
    theta %= TWO_PI
    if theta >= TWO_PI - _ANGLE_WRAP_EPS:
        theta = 0.0
    return LogPolarCoord(log_r=math.log(r) if r > 0 else -math.inf, theta=theta)


def log_polar_bin(
    q: Sequence[float],
    ref: Sequence[float],
    ref_dir: float,
    alpha: float,
    params: ShapeContextParams,
) -> int | None:
    """
    Histogram bin of q relative to ref.

    Radii below the first edge fall in radial bin 0. Returns None when q
    lies at or beyond r_max * alpha, or coincides with ref.

    Raises:
        ConfigValidationError: If alpha is not positive
    """
    if not alpha > 0:
        raise ConfigValidationError("alpha", alpha, "must be positive")
    offset = np.array([[q[0] - ref[0], q[1] - ref[1]]], dtype=np.float64)
    index, outside, at_ref = _bin_indices(offset, ref_dir, alpha, params)
    if outside[0] or at_ref[0]:
        return None
    return int(index[0])


def shape_context(
    ref: Sequence[float],
    ref_dir: float,
    contour: ContourSet | np.ndarray,
    params: ShapeContextParams | None = None,
    alpha: float | None = None,
) -> ShapeContext:
    """
    Count the contour points falling in each log-polar bin around ref.

    Args:
        ref: (x, y) reference position
        ref_dir: Reference direction, used when params.rotation_invariant
        contour: Contour points (at least 2)
        params: Bin geometry
        alpha: Normalizing distance; computed from the contour when omitted

    Raises:
        HistogramConservationError: If binned, outside and at-reference
            counts do not add up to the number of points
    """
    params = params or ShapeContextParams()
    pts = _as_points(contour)
    a = mean_pairwise_distance(pts) if alpha is None else alpha
    if not a > 0:
        raise ConfigValidationError("alpha", a, "must be positive")

    offsets = pts - np.asarray(ref, dtype=np.float64)
    index, outside, at_ref = _bin_indices(offsets, ref_dir, a, params)
    keep = ~(outside | at_ref)
    counts = np.bincount(index[keep], minlength=params.bins).astype(np.int64)

    binned, n_out, n_ref = int(counts.sum()), int(outside.sum()), int(at_ref.sum())
    if binned + n_out + n_ref != pts.shape[0]:
        raise HistogramConservationError(binned, n_out, n_ref, pts.shape[0])

    return ShapeContext(
        counts=counts,
        ref_point=(float(ref[0]), float(ref[1])),
        alpha=a,
        outside=n_out,
        at_ref=n_ref,
    )


def keypoint_direction(kp: Keypoint, contour: ContourSet | np.ndarray) -> tuple[float, bool]:
    """
    Local boundary direction near a keypoint.

    Fits a total-least-squares line to the contour points nearest to the
    keypoint and returns its angle in [0, pi).

    Returns:
        (angle, reliable); reliable is False when fewer than 2 distinct
        points are near or the fitted direction is undetermined
    """
    pts = _as_points(contour)
    dist = np.hypot(pts[:, 0] - kp.x, pts[:, 1] - kp.y)
    near = pts[np.argsort(dist, kind="stable")[:TANGENT_NEIGHBOURS]]
    if np.unique(near, axis=0).shape[0] < 2:
        return 0.0, False

    centred = near - near.mean(axis=0)
    evals, evecs = np.linalg.eigh(centred.T @ centred)
    if evals[1] - evals[0] <= 1e-12 * max(evals[1], 1.0):
        return 0.0, False

    vx, vy = evecs[:, 1]
    angle = math.atan2(vy, vx) % math.pi
    if angle >= math.pi - _ANGLE_WRAP_EPS:
        angle = 0.0
    return angle, True


# =============================================================================
# Color Moments and Fusion
# =============================================================================


def color_moments(img: RasterImage, kp: Keypoint) -> ColorMoments:
    """
    Channel statistics over the 5x5 window centred on the keypoint.

    The window is clamped at the image border, shrinking the sample.
    Sums are accumulated in integers so constant windows give exactly zero
    variance.
    """
    half = COLOR_WINDOW // 2
    cx, cy = math.floor(kp.x + 0.5), math.floor(kp.y + 0.5)
    x0, x1 = max(cx - half, 0), min(cx + half, img.width - 1)
    y0, y1 = max(cy - half, 0), min(cy + half, img.height - 1)

    window = img.pixels[y0 : y1 + 1, x0 : x1 + 1].reshape(-1, 3).astype(np.int64)
    n = window.shape[0]
    total = window.sum(axis=0)
    squares = (window * window).sum(axis=0)

    means = total / (n * 255)
    variances = (n * squares - total * total) / (n * n * 255 * 255)
    return ColorMoments(*means.tolist(), *variances.tolist())


def fuse(
    sc: ShapeContext,
    cm: ColorMoments,
    color_weight: float,
    second_moment: SecondMoment = "variance",
    keypoint: Keypoint | None = None,
) -> FusedDescriptor:
    """
    Concatenate the L1-normalized histogram with the weighted color moments.

    An empty histogram contributes an all-zero shape block.
    """
    if color_weight < 0:
        raise ConfigValidationError("color_weight", color_weight, "must be non-negative")
    total = sc.total
    shape_block = sc.counts / total if total > 0 else np.zeros(sc.counts.size)
    vector = np.concatenate([shape_block, color_weight * cm.as_vector(second_moment)])
    return FusedDescriptor(vector=vector, keypoint=keypoint, moments=cm)


def reweight_color(
    ds: DescriptorSet,
    color_weight: float,
    second_moment: SecondMoment = "variance",
) -> DescriptorSet:
    """
    Rebuild every descriptor of a set with a different color weight.

    Shape blocks are reused as they are.
    """
    rebuilt = []
    for desc in ds.descriptors:
        if desc.moments is None:
            raise ConfigValidationError("descriptor", ds.image_id, "color moments were not kept")
        vector = np.concatenate(
            [desc.shape_part, color_weight * desc.moments.as_vector(second_moment)]
        )
        rebuilt.append(replace(desc, vector=vector))
    return replace(ds, descriptors=rebuilt)


# =============================================================================
# Whole-image Description
# =============================================================================


def describe_image(
    img: RasterImage,
    config: DescriptorConfig | None = None,
    image_id: str = "",
) -> DescriptorSet:
    """
    Describe every keypoint of an image.

    Edges are sampled to n contour points, DoG keypoints are detected, and
    each keypoint gets a shape context over the sampled contour (oriented
    by the local boundary direction when rotation invariance is on) fused
    with its color moments.

    Returns:
        DescriptorSet; empty with an EmptyReason when the image has no
        contour, no keypoints or is too small
    """
    config = config or DescriptorConfig()
    dim = config.dimension
    img = resize_to_max_side(img, config.max_side)
    gray = to_grayscale(img)

    try:
        edges = detect_edges(gray, config.edges.low, config.edges.high, config.edges.sigma)
        contour = sample_contour(edges, config.n, config.seed, image_id)
        keypoints = detect_keypoints(gray, config.scale_space)
    except EmptyContourError:
        logger.debug("Image %s has no contour", image_id)
        return DescriptorSet.empty(image_id, dim, EmptyReason.NO_CONTOUR)
    except ImageTooSmallError as e:
        logger.debug("Image %s skipped: %s", image_id, e)
        return DescriptorSet.empty(image_id, dim, EmptyReason.TOO_SMALL)

    if not keypoints:
        logger.debug("Image %s has no keypoints", image_id)
        return DescriptorSet.empty(image_id, dim, EmptyReason.NO_KEYPOINTS)

    alpha = mean_pairwise_distance(contour)
    descriptors = []
    for kp in keypoints:
        ref_dir = keypoint_direction(kp, contour)[0] if config.shape.rotation_invariant else 0.0
        sc = shape_context((kp.x, kp.y), ref_dir, contour, config.shape, alpha=alpha)
        cm = color_moments(img, kp)
        descriptors.append(fuse(sc, cm, config.color_weight, config.second_moment, keypoint=kp))

    logger.debug(
        "Image %s: %d contour points, %d descriptors", image_id, contour.n, len(descriptors)
    )
    return DescriptorSet(image_id=image_id, dimension=dim, descriptors=descriptors)
