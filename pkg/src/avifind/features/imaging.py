"""
Image decoding, edge maps and contour sampling.

Images are decoded with Pillow into 8-bit RGB arrays, converted to BT.601
luminance, and passed through a Canny detector (scikit-image). The edge
pixels are reduced to n contour points by greedy farthest-point sampling,
which gives near-uniform coverage of both outer and inner boundaries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from skimage.feature import canny

from avifind.constants import LUMA_WEIGHTS, EdgeDefaults
from avifind.core.exceptions import (
    ConfigValidationError,
    CorruptImageError,
    EmptyContourError,
    ImageReadError,
    ImageTooSmallError,
    UnsupportedImageError,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Types
# =============================================================================


@dataclass(frozen=True, eq=False)
class RasterImage:
    """
    Decoded 8-bit RGB image.

    Attributes:
        pixels: (height, width, 3) uint8 array, row-major
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected an (h, w, 3) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if px.dtype != np.uint8:
            raise ValueError(f"expected uint8 channels, got {px.dtype}")

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


@dataclass(frozen=True, eq=False)
class EdgeMap:
    """
    Boundary pixels of one image.

    Attributes:
        mask: (height, width) boolean array; True marks an edge pixel
    """

    mask: np.ndarray

    @property
    def width(self) -> int:
        return int(self.mask.shape[1])

    @property
    def height(self) -> int:
        return int(self.mask.shape[0])

    @property
    def on(self) -> np.ndarray:
        """Edge pixel coordinates as an (m, 2) float array of (x, y), row-major order."""
        ys, xs = np.nonzero(self.mask)
        return np.column_stack([xs, ys]).astype(np.float64)

    def __len__(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True, eq=False)
class ContourSet:
    """
    Sampled boundary points of one image.

    Attributes:
        points: (n, 2) float array of distinct (x, y) pixel coordinates
        source_id: Identifier of the originating image
        requested: The n that was asked for; larger than `n` when the edge
            map had fewer pixels
    """

    points: np.ndarray
    source_id: str = ""
    requested: int = field(default=0)

    def __post_init__(self) -> None:
        pts = self.points
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"expected (n, 2) points, got shape {pts.shape}")
        if pts.shape[0] < 2:
            raise ValueError("a contour needs at least 2 points")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ValueError("contour points must be distinct")

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def clamped(self) -> bool:
        """True when fewer points than requested were available."""
        return self.requested > self.n


# =============================================================================
# Decoding
# =============================================================================


def load_image(path: str | Path) -> RasterImage:
    """
    Decode an image file to 8-bit RGB.

    Grayscale and palette sources are expanded to three equal channels;
    alpha is discarded.

    Args:
        path: Image file (PNG, JPEG, or any other format Pillow decodes)

    Returns:
        The decoded RasterImage

    Raises:
        ImageReadError: If the file cannot be opened
        UnsupportedImageError: If the format is not recognised
        CorruptImageError: If the payload is truncated or invalid
    """
    file_path = Path(path)
    try:
        with Image.open(file_path) as src:
            src.load()
            rgb = src.convert("RGB")
    except UnidentifiedImageError:
        raise UnsupportedImageError(str(file_path)) from None
    except (FileNotFoundError, IsADirectoryError, PermissionError) as e:
        raise ImageReadError(str(file_path), e.strerror or type(e).__name__) from None
    except (OSError, SyntaxError, ValueError) as e:
        raise CorruptImageError(str(file_path), str(e)) from None

    return RasterImage(np.asarray(rgb, dtype=np.uint8).copy())


def resize_to_max_side(img: RasterImage, max_side: int | None) -> RasterImage:
    """
    Down-scale so the longer side is at most `max_side` pixels.

    Returns the input unchanged when max_side is None or already satisfied.
    """
    if max_side is None or max(img.width, img.height) <= max_side:
        return img
    scale = max_side / max(img.width, img.height)
    size = (max(1, round(img.width * scale)), max(1, round(img.height * scale)))
    resized = Image.fromarray(img.pixels).resize(size, Image.Resampling.LANCZOS)
    return RasterImage(np.asarray(resized, dtype=np.uint8).copy())


def to_grayscale(img: RasterImage) -> np.ndarray:
    """
    BT.601 luminance of every pixel, scaled to [0, 1].

    Returns:
        (height, width) float64 array
    """
    luma = img.pixels.astype(np.float64) @ np.asarray(LUMA_WEIGHTS) / 255.0
    return np.clip(luma, 0.0, 1.0)


# =============================================================================
# Edges and Contours
# =============================================================================


def kernel_radius(sigma: float) -> int:
    """Half-width of a Gaussian kernel truncated at EdgeDefaults.TRUNCATE sigma."""
    return int(EdgeDefaults.TRUNCATE * sigma + 0.5)


def detect_edges(
    gray: np.ndarray,
    low: float = EdgeDefaults.LOW,
    high: float = EdgeDefaults.HIGH,
    sigma: float = EdgeDefaults.SIGMA,
) -> EdgeMap:
    """
    Canny edge map of an intensity image.

    Gaussian smoothing (clamp-to-edge borders), Sobel gradients,
    non-maximum suppression and double-threshold hysteresis. The
    thresholds apply to the gradient magnitude of the smoothed image.

    Args:
        gray: (height, width) intensities in [0, 1]
        low: Hysteresis low threshold
        high: Hysteresis high threshold
        sigma: Smoothing sigma

    Raises:
        ConfigValidationError: Unless 0 <= low <= high <= 1
        ImageTooSmallError: If the image is smaller than the smoothing kernel
    """
    if not 0.0 <= low <= high <= 1.0:
        raise ConfigValidationError("thresholds", (low, high), "need 0 <= low <= high <= 1")

    size = 2 * kernel_radius(sigma) + 1
    if min(gray.shape) < size:
        raise ImageTooSmallError(tuple(gray.shape), size, "edge detection")

    mask = canny(
        gray,
        sigma=sigma,
        low_threshold=low,
        high_threshold=high,
        mode="nearest",
    )
    return EdgeMap(np.asarray(mask, dtype=bool))


def sample_contour(edges: EdgeMap, n: int, seed: int, source_id: str = "") -> ContourSet:
    """
    Pick n well-spread contour points from an edge map.

    When the map holds more than n pixels, greedy farthest-point sampling
    starts from a seeded random pixel and repeatedly adds the pixel whose
    distance to the current selection is largest (ties go to the lowest
    row-major index). Otherwise every edge pixel is returned.

    Args:
        edges: Edge map to sample from
        n: Requested point count (>= 2)
        seed: Seed for the starting pixel
        source_id: Identifier recorded in the result

    Raises:
        ConfigValidationError: If n < 2
        EmptyContourError: If the map has fewer than 2 edge pixels
    """
    if n < 2:
        raise ConfigValidationError("n", n, "at least 2 contour points are required")

    coords = edges.on
    m = coords.shape[0]
    if m < 2:
        raise EmptyContourError(source_id, m)

    if m <= n:
        logger.debug("Contour %s: %d edge pixels, keeping all (requested %d)", source_id, m, n)
        return ContourSet(coords, source_id=source_id, requested=n)

    rng = np.random.default_rng(seed)
    chosen = np.empty(n, dtype=np.intp)
    chosen[0] = rng.integers(m)
    nearest = np.hypot(*(coords - coords[chosen[0]]).T)
    for i in range(1, n):
        nxt = int(np.argmax(nearest))
        chosen[i] = nxt
        np.minimum(nearest, np.hypot(*(coords - coords[nxt]).T), out=nearest)

    return ContourSet(coords[chosen], source_id=source_id, requested=n)
