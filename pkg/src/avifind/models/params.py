"""
Parameter models for the descriptor pipeline.

These models carry the tunables of edge detection, the DoG scale space
and the log-polar shape-context geometry, validated with pydantic so
that every stage can trust its inputs.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from avifind.constants import (
    COLOR_MOMENT_COUNT,
    DEFAULT_COLOR_WEIGHT,
    DEFAULT_CONTOUR_POINTS,
    EdgeDefaults,
    ScaleSpaceDefaults,
    ShapeContextDefaults,
)

SecondMoment = Literal["variance", "std"]


class EdgeParams(BaseModel):
    """
    Canny edge detector settings.

    Attributes:
        low: Hysteresis low threshold on the Sobel gradient magnitude
        high: Hysteresis high threshold
        sigma: Gaussian smoothing sigma
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    low: float = Field(default=EdgeDefaults.LOW, ge=0.0, le=1.0)
    high: float = Field(default=EdgeDefaults.HIGH, ge=0.0, le=1.0)
    sigma: float = Field(default=EdgeDefaults.SIGMA, gt=0.0)

    @model_validator(mode="after")
    def check_order(self) -> EdgeParams:
        """Low threshold may not exceed the high one."""
        if self.low > self.high:
            raise ValueError(f"low threshold {self.low} exceeds high threshold {self.high}")
        return self


class ScaleSpaceParams(BaseModel):
    """
    Difference-of-Gaussian scale-space settings.

    Attributes:
        octaves: Requested octave count
        scales_per_octave: Intervals per octave (S); S+3 Gaussian levels
        sigma0: Base sigma of every octave
        contrast_thresh: Minimum |DoG| of an accepted extremum
        edge_thresh: Principal-curvature ratio limit
        upsample: Double the input before building octave 0
        assumed_blur: Blur already present in the input
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    octaves: int = Field(default=ScaleSpaceDefaults.OCTAVES, ge=1)
    scales_per_octave: int = Field(default=ScaleSpaceDefaults.SCALES_PER_OCTAVE, ge=3)
    sigma0: float = Field(default=ScaleSpaceDefaults.SIGMA0, gt=0.0)
    contrast_thresh: float = Field(default=ScaleSpaceDefaults.CONTRAST_THRESH, gt=0.0)
    edge_thresh: float = Field(default=ScaleSpaceDefaults.EDGE_THRESH, gt=0.0)
    upsample: bool = False
    assumed_blur: float = Field(default=ScaleSpaceDefaults.ASSUMED_BLUR, ge=0.0)

    def level_sigma(self, index: float) -> float:
        """Sigma of Gaussian level `index` relative to its octave."""
        return self.sigma0 * 2.0 ** (index / self.scales_per_octave)

    @property
    def edge_limit(self) -> float:
        """Upper bound on trace^2/det of the 2x2 spatial Hessian."""
        return (self.edge_thresh + 1.0) ** 2 / self.edge_thresh


class ShapeContextParams(BaseModel):
    """
    Log-polar histogram geometry.

    Radial edges are log-uniform between r_min and r_max (in units of the
    mean pairwise contour distance); angular bins are uniform from 0.

    Attributes:
        radial_bins: R
        angular_bins: A
        r_min: Innermost radial edge
        r_max: Outer radius; points at or beyond it are not binned
        rotation_invariant: Measure angles from a local tangent direction
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    radial_bins: int = Field(default=ShapeContextDefaults.RADIAL_BINS, ge=1)
    angular_bins: int = Field(default=ShapeContextDefaults.ANGULAR_BINS, ge=1)
    r_min: float = Field(default=ShapeContextDefaults.R_MIN, gt=0.0)
    r_max: float = Field(default=ShapeContextDefaults.R_MAX, gt=0.0)
    rotation_invariant: bool = False

    @model_validator(mode="after")
    def check_radii(self) -> ShapeContextParams:
        """Inner radius must be strictly below the outer one."""
        if not self.r_min < self.r_max:
            raise ValueError(f"r_min {self.r_min} must be below r_max {self.r_max}")
        return self

    @property
    def bins(self) -> int:
        """Histogram length L = R * A."""
        return self.radial_bins * self.angular_bins

    @property
    def radial_edges(self) -> np.ndarray:
        """The R+1 log-spaced radial edges, from r_min to r_max."""
        j = np.arange(self.radial_bins + 1, dtype=np.float64)
        edges = self.r_min * (self.r_max / self.r_min) ** (j / self.radial_bins)
        edges[-1] = self.r_max
        return edges


class DescriptorConfig(BaseModel):
    """
    Everything describe_image needs for one image.

    Attributes:
        n: Contour points to sample
        color_weight: Weight w of the color-moment block
        seed: Seed of the contour sampler
        second_moment: Fuse variances or standard deviations
        max_side: Optional down-scaling bound applied after decoding
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(default=DEFAULT_CONTOUR_POINTS, ge=2)
    shape: ShapeContextParams = Field(default_factory=ShapeContextParams)
    scale_space: ScaleSpaceParams = Field(default_factory=ScaleSpaceParams)
    edges: EdgeParams = Field(default_factory=EdgeParams)
    color_weight: float = Field(default=DEFAULT_COLOR_WEIGHT, ge=0.0)
    second_moment: SecondMoment = "variance"
    seed: int = 0
    max_side: int | None = Field(default=None, ge=16)

    @property
    def dimension(self) -> int:
        """Length of one fused descriptor, L + 6."""
        return self.shape.bins + COLOR_MOMENT_COUNT
