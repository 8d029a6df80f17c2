"""
Difference-of-Gaussian interest points.

Builds a Gaussian scale space one octave at a time, subtracts adjacent
levels, and keeps the strict 3x3x3 extrema that survive sub-pixel
refinement, the contrast threshold and the principal-curvature edge test.
Each surviving point gets the dominant gradient orientation of its
neighbourhood.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter, map_coordinates, maximum_filter, minimum_filter

from avifind.constants import ScaleSpaceDefaults
from avifind.core.exceptions import ImageTooSmallError
from avifind.models.params import ScaleSpaceParams

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# 26-neighbourhood, centre excluded
_NEIGHBOURS = np.ones((3, 3, 3), dtype=bool)
_NEIGHBOURS[1, 1, 1] = False


@dataclass(frozen=True)
class Keypoint:
    """
    A scale-space interest point in input-image coordinates.

    Attributes:
        x: Sub-pixel column
        y: Sub-pixel row
        scale: Sigma of the detecting level, in input pixels
        orientation: Dominant gradient direction in [0, 2*pi)
        response: |DoG| at the refined extremum
        octave: Octave the point was found in
        layer: DoG layer within the octave
    """

    x: float
    y: float
    scale: float
    orientation: float = 0.0
    response: float = 0.0
    octave: int = 0
    layer: int = 0


@dataclass(frozen=True, eq=False)
class DogPyramid:
    """
    Gaussian and DoG stacks per octave.

    Attributes:
        gaussians: One (S+3, h, w) array per octave
        dogs: One (S+2, h, w) array per octave; layer i is level i minus level i+1
        requested_octaves: Octave count asked for
        base_factor: Size of octave 0 relative to the input (2 when upsampled)
    """

    gaussians: list[np.ndarray]
    dogs: list[np.ndarray]
    requested_octaves: int
    base_factor: float

    @property
    def octaves(self) -> int:
        return len(self.dogs)

    @property
    def truncated(self) -> bool:
        """True when the image ran out of resolution before the requested octave count."""
        return self.octaves < self.requested_octaves

    def to_input(self, octave: int, value: float) -> float:
        """Map an octave-local coordinate or sigma to input-image units."""
        return value * (2.0**octave) / self.base_factor


# =============================================================================
# Pyramid
# =============================================================================


def _upsample(gray: np.ndarray) -> np.ndarray:
    """Double the resolution by linear interpolation; input pixel centres land on even indices."""
    h, w = gray.shape
    rows, cols = np.mgrid[0 : 2 * h - 1, 0 : 2 * w - 1].astype(np.float64) / 2.0
    return map_coordinates(gray, [rows, cols], order=1, mode="nearest")


def build_dog_pyramid(gray: np.ndarray, params: ScaleSpaceParams | None = None) -> DogPyramid:
    """
    Build the Gaussian and Difference-of-Gaussian scale space.

    Octave 0 is the input itself unless params.upsample doubles it first.
    Each octave holds S+3 Gaussian levels with sigma_i = sigma0 * 2^(i/S),
    reached incrementally from the previous level. The next octave starts
    from level S subsampled by two. Octaves stop early once a side would
    drop below ScaleSpaceDefaults.MIN_OCTAVE_SIDE pixels.

    Args:
        gray: (height, width) intensities in [0, 1]
        params: Scale-space settings

    Raises:
        ImageTooSmallError: If the shorter side is below 16 pixels
    """
    params = params or ScaleSpaceParams()
    minimum = ScaleSpaceDefaults.MIN_IMAGE_SIDE
    if min(gray.shape) < minimum:
        raise ImageTooSmallError(tuple(gray.shape), minimum, "scale space")

    image = np.asarray(gray, dtype=np.float64)
    factor = 2.0 if params.upsample else 1.0
    if params.upsample:
        image = _upsample(image)

    present = factor * params.assumed_blur
    base_sigma = math.sqrt(max(params.sigma0**2 - present**2, 0.01))
    base = gaussian_filter(image, base_sigma, mode="nearest")

    levels = params.scales_per_octave + 3
    increments = [
        math.sqrt(params.level_sigma(i) ** 2 - params.level_sigma(i - 1) ** 2)
        for i in range(1, levels)
    ]

    gaussians: list[np.ndarray] = []
    dogs: list[np.ndarray] = []
    for octave in range(params.octaves):
        if min(base.shape) < ScaleSpaceDefaults.MIN_OCTAVE_SIDE:
            break
        stack = [base]
        for inc in increments:
            stack.append(gaussian_filter(stack[-1], inc, mode="nearest"))
        gauss = np.stack(stack)
        gaussians.append(gauss)
        dogs.append(gauss[:-1] - gauss[1:])
        logger.debug("Octave %d: %dx%d", octave, base.shape[1], base.shape[0])
        base = gauss[params.scales_per_octave][::2, ::2]

    pyramid = DogPyramid(gaussians, dogs, params.octaves, factor)
    if pyramid.truncated:
        logger.debug(
            "Scale space truncated to %d of %d octaves for %dx%d input",
            pyramid.octaves,
            params.octaves,
            gray.shape[1],
            gray.shape[0],
        )
    return pyramid


# =============================================================================
# Extrema
# =============================================================================


def _candidates(dog: np.ndarray, threshold: float) -> np.ndarray:
    """(layer, row, col) of strict 26-neighbour extrema with a full neighbourhood."""
    peak = maximum_filter(dog, footprint=_NEIGHBOURS, mode="nearest")
    trough = minimum_filter(dog, footprint=_NEIGHBOURS, mode="nearest")
    mask = ((dog > peak) | (dog < trough)) & (np.abs(dog) >= threshold)
    interior = np.zeros_like(mask)
    interior[1:-1, 1:-1, 1:-1] = True
    return np.argwhere(mask & interior)


def _gradient(cube: np.ndarray) -> np.ndarray:
    """Central-difference gradient (dx, dy, ds) at the centre of a 3x3x3 cube."""
    return 0.5 * np.array(
        [
            cube[1, 1, 2] - cube[1, 1, 0],
            cube[1, 2, 1] - cube[1, 0, 1],
            cube[2, 1, 1] - cube[0, 1, 1],
        ]
    )


def _hessian(cube: np.ndarray) -> np.ndarray:
    """Central-difference Hessian over (x, y, s) at the centre of a 3x3x3 cube."""
    c = cube[1, 1, 1]
    dxx = cube[1, 1, 2] - 2 * c + cube[1, 1, 0]
    dyy = cube[1, 2, 1] - 2 * c + cube[1, 0, 1]
    dss = cube[2, 1, 1] - 2 * c + cube[0, 1, 1]
    dxy = 0.25 * (cube[1, 2, 2] - cube[1, 2, 0] - cube[1, 0, 2] + cube[1, 0, 0])
    dxs = 0.25 * (cube[2, 1, 2] - cube[2, 1, 0] - cube[0, 1, 2] + cube[0, 1, 0])
    dys = 0.25 * (cube[2, 2, 1] - cube[2, 0, 1] - cube[0, 2, 1] + cube[0, 0, 1])
    return np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])


@dataclass(frozen=True)
class _Refined:
    layer: int
    row: int
    col: int
    offset: np.ndarray
    value: float


def _refine(dog: np.ndarray, layer: int, row: int, col: int, params: ScaleSpaceParams) -> _Refined | None:
    """
    Quadratic sub-pixel fit, moving to the neighbouring sample while the
    offset exceeds half a pixel. Returns None for diverging, out-of-bounds
    or rejected points.
    """
    n_layers, h, w = dog.shape
    for _ in range(ScaleSpaceDefaults.MAX_REFINE_STEPS):
        cube = dog[layer - 1 : layer + 2, row - 1 : row + 2, col - 1 : col + 2]
        grad = _gradient(cube)
        hess = _hessian(cube)
        try:
            offset = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(offset)):
            return None
        if np.all(np.abs(offset) < 0.5):
            break
        col += int(np.round(offset[0]))
        row += int(np.round(offset[1]))
        layer += int(np.round(offset[2]))
        if not (1 <= layer <= n_layers - 2 and 1 <= row <= h - 2 and 1 <= col <= w - 2):
            return None
    else:
        return None

    value = float(cube[1, 1, 1] + 0.5 * grad @ offset)
    if abs(value) < params.contrast_thresh:
        return None

    dxx, dyy, dxy = hess[0, 0], hess[1, 1], hess[0, 1]
    trace = dxx + dyy
    det = dxx * dyy - dxy * dxy
    if det <= 0 or trace * trace / det >= params.edge_limit:
        return None

    return _Refined(layer, row, col, offset, value)


def _dominant_orientation(image: np.ndarray, col: float, row: float, sigma: float) -> float:
    """
    Peak of a 36-bin, Gaussian-weighted gradient-orientation histogram
    within radius 3*sigma, refined by a parabola through the peak bin and
    its neighbours.
    """
    bins = ScaleSpaceDefaults.ORIENTATION_BINS
    radius = max(1, int(round(ScaleSpaceDefaults.ORIENTATION_RADIUS_FACTOR * sigma)))
    h, w = image.shape
    cy, cx = int(round(row)), int(round(col))
    y0, y1 = max(cy - radius, 1), min(cy + radius, h - 2)
    x0, x1 = max(cx - radius, 1), min(cx + radius, w - 2)
    if y0 > y1 or x0 > x1:
        return 0.0

    ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    inside = (ys - cy) ** 2 + (xs - cx) ** 2 <= radius * radius
    ys, xs = ys[inside], xs[inside]

    dx = image[ys, xs + 1] - image[ys, xs - 1]
    dy = image[ys + 1, xs] - image[ys - 1, xs]
    magnitude = np.hypot(dx, dy)
    angle = np.mod(np.arctan2(dy, dx), TWO_PI)
    weight = np.exp(-((ys - row) ** 2 + (xs - col) ** 2) / (2.0 * (1.5 * sigma) ** 2))

    index = np.floor(angle * bins / TWO_PI).astype(np.intp) % bins
    hist = np.bincount(index, weights=weight * magnitude, minlength=bins)
    if not np.any(hist > 0):
        return 0.0

    peak = int(np.argmax(hist))
    left, centre, right = hist[(peak - 1) % bins], hist[peak], hist[(peak + 1) % bins]
    denom = left - 2.0 * centre + right
    shift = 0.5 * (left - right) / denom if denom != 0 else 0.0
    theta = float(np.mod((peak + 0.5 + shift) * TWO_PI / bins, TWO_PI))
    return 0.0 if theta >= TWO_PI else theta


def detect_keypoints(gray: np.ndarray, params: ScaleSpaceParams | None = None) -> list[Keypoint]:
    """
    Detect DoG interest points.

    Candidates are strict extrema over their 3x3x3 neighbourhood. Each is
    refined by a quadratic fit (at most 5 moves), then kept only if the
    interpolated |DoG| reaches contrast_thresh and the spatial Hessian
    passes trace^2/det < (r+1)^2/r. Points refining onto the same sample
    are reported once.

    Args:
        gray: (height, width) intensities in [0, 1]
        params: Scale-space settings

    Returns:
        Keypoints ordered by octave, layer, row and column
    """
    params = params or ScaleSpaceParams()
    pyramid = build_dog_pyramid(gray, params)
    height, width = gray.shape

    keypoints: list[Keypoint] = []
    seen: set[tuple[int, int, int, int]] = set()
    for octave, (gauss, dog) in enumerate(zip(pyramid.gaussians, pyramid.dogs)):
        for layer, row, col in _candidates(dog, 0.5 * params.contrast_thresh):
            refined = _refine(dog, int(layer), int(row), int(col), params)
            if refined is None:
                continue
            key = (octave, refined.layer, refined.row, refined.col)
            if key in seen:
                continue
            seen.add(key)

            ox, oy, ds = refined.offset
            local_x = refined.col + ox
            local_y = refined.row + oy
            local_sigma = params.level_sigma(refined.layer + ds)
            orientation = _dominant_orientation(gauss[refined.layer], local_x, local_y, local_sigma)
            keypoints.append(
                Keypoint(
                    x=float(np.clip(pyramid.to_input(octave, local_x), 0.0, width - 1)),
                    y=float(np.clip(pyramid.to_input(octave, local_y), 0.0, height - 1)),
                    scale=pyramid.to_input(octave, local_sigma),
                    orientation=orientation,
                    response=abs(refined.value),
                    octave=octave,
                    layer=refined.layer,
                )
            )

    logger.debug("Detected %d keypoints over %d octaves", len(keypoints), pyramid.octaves)
    return keypoints
