"""
Constants, default values and file-format tokens for avifind.

This module provides centralized configuration for:
- Pipeline defaults (edges, scale space, shape context, vocabulary)
- Vocabulary, index and report file headers
- Supported image extensions
"""

from __future__ import annotations

from typing import Final

# =============================================================================
# Imaging
# =============================================================================


class EdgeDefaults:
    """Canny edge detector defaults."""

    SIGMA: Final[float] = 1.4
    LOW: Final[float] = 0.1
    HIGH: Final[float] = 0.2
    # scipy/skimage Gaussian kernels are truncated at 4 sigma
    TRUNCATE: Final[float] = 4.0


# ITU-R BT.601 luma weights
LUMA_WEIGHTS: Final[tuple[float, float, float]] = (0.299, 0.587, 0.114)

SUPPORTED_EXTENSIONS: Final[frozenset[str]] = frozenset(
    {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff"}
)

# =============================================================================
# Keypoints
# =============================================================================


class ScaleSpaceDefaults:
    """Difference-of-Gaussian detector defaults (standard SIFT values)."""

    OCTAVES: Final[int] = 4
    SCALES_PER_OCTAVE: Final[int] = 3
    SIGMA0: Final[float] = 1.6
    CONTRAST_THRESH: Final[float] = 0.03
    EDGE_THRESH: Final[float] = 10.0
    ASSUMED_BLUR: Final[float] = 0.5
    MIN_IMAGE_SIDE: Final[int] = 16
    MIN_OCTAVE_SIDE: Final[int] = 8
    MAX_REFINE_STEPS: Final[int] = 5
    ORIENTATION_BINS: Final[int] = 36
    ORIENTATION_RADIUS_FACTOR: Final[float] = 3.0


# =============================================================================
# Descriptors
# =============================================================================


class ShapeContextDefaults:
    """Log-polar bin geometry defaults."""

    RADIAL_BINS: Final[int] = 5
    ANGULAR_BINS: Final[int] = 12
    R_MIN: Final[float] = 0.125
    R_MAX: Final[float] = 2.0


COLOR_MOMENT_COUNT: Final[int] = 6
COLOR_WINDOW: Final[int] = 5
DEFAULT_COLOR_WEIGHT: Final[float] = 0.5
DEFAULT_CONTOUR_POINTS: Final[int] = 200
TANGENT_NEIGHBOURS: Final[int] = 5

# =============================================================================
# Vocabulary / Index
# =============================================================================


class KMeansDefaults:
    """Lloyd iteration defaults."""

    K: Final[int] = 200
    MAX_ITER: Final[int] = 100
    TOL: Final[float] = 1e-4


class FileFormats:
    """Header tokens of the text artifacts."""

    VOCAB_MAGIC: Final[str] = "AVIVOCAB"
    VOCAB_VERSION: Final[int] = 1
    INDEX_MAGIC: Final[str] = "AVIIDX"
    INDEX_VERSION: Final[int] = 1
    SIGNIFICANT_DIGITS: Final[int] = 9


# =============================================================================
# Evaluation
# =============================================================================

DEFAULT_TOP_M: Final[int] = 10
RECALL_LEVELS: Final[tuple[float, ...]] = tuple(round(0.1 * i, 1) for i in range(1, 11))
CURVE_CSV_HEADER: Final[str] = "variant,k,recall,precision"
