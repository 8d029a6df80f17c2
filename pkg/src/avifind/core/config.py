"""
Configuration management for avifind.

Handles loading configuration from environment variables, a
`key = value` config file, and CLI arguments with proper precedence
(flags > config file > built-in defaults).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, Any

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from avifind.constants import (
    DEFAULT_COLOR_WEIGHT,
    DEFAULT_CONTOUR_POINTS,
    DEFAULT_TOP_M,
    EdgeDefaults,
    KMeansDefaults,
    ScaleSpaceDefaults,
    ShapeContextDefaults,
)
from avifind.core.exceptions import (
    ConfigFileNotFoundError,
    ConfigurationError,
    ConfigValidationError,
)
from avifind.models.params import (
    DescriptorConfig,
    EdgeParams,
    ScaleSpaceParams,
    SecondMoment,
    ShapeContextParams,
)

# =============================================================================
# Seed Fan-out
# =============================================================================


@dataclass(frozen=True)
class SeedPlan:
    """
    Seeds derived from the single `--seed` flag.

    Attributes:
        sampling: Contour farthest-point sampler
        kmeans: k-means++ seeding
        shuffle: Per-class subset shuffling
        subsample: Training-descriptor subsample
    """

    sampling: int
    kmeans: int
    shuffle: int
    subsample: int

    @classmethod
    def from_seed(cls, seed: int) -> SeedPlan:
        """Fan one seed out by fixed offsets."""
        return cls(sampling=seed, kmeans=seed + 1, shuffle=seed + 2, subsample=seed + 3)


# =============================================================================
# Pipeline Configuration
# =============================================================================


class PipelineConfig(BaseModel):
    """
    Every tunable of the retrieval pipeline.

    Field names double as config-file keys.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Contour / shape context
    n: Annotated[int, Field(ge=2)] = DEFAULT_CONTOUR_POINTS
    radial_bins: Annotated[int, Field(ge=1)] = ShapeContextDefaults.RADIAL_BINS
    angular_bins: Annotated[int, Field(ge=1)] = ShapeContextDefaults.ANGULAR_BINS
    r_min: Annotated[float, Field(gt=0.0)] = ShapeContextDefaults.R_MIN
    r_max: Annotated[float, Field(gt=0.0)] = ShapeContextDefaults.R_MAX
    rotation_invariant: bool = False

    # DoG scale space
    octaves: Annotated[int, Field(ge=1)] = ScaleSpaceDefaults.OCTAVES
    scales_per_octave: Annotated[int, Field(ge=3)] = ScaleSpaceDefaults.SCALES_PER_OCTAVE
    sigma0: Annotated[float, Field(gt=0.0)] = ScaleSpaceDefaults.SIGMA0
    contrast_thresh: Annotated[float, Field(gt=0.0)] = ScaleSpaceDefaults.CONTRAST_THRESH
    edge_thresh: Annotated[float, Field(gt=0.0)] = ScaleSpaceDefaults.EDGE_THRESH
    upsample: bool = False

    # Edges
    canny_low: Annotated[float, Field(ge=0.0, le=1.0)] = EdgeDefaults.LOW
    canny_high: Annotated[float, Field(ge=0.0, le=1.0)] = EdgeDefaults.HIGH
    canny_sigma: Annotated[float, Field(gt=0.0)] = EdgeDefaults.SIGMA
    max_side: Annotated[int | None, Field(ge=16)] = None

    # Fusion
    color_weight: Annotated[float, Field(ge=0.0)] = DEFAULT_COLOR_WEIGHT
    second_moment: SecondMoment = "variance"

    # Vocabulary / retrieval
    k: Annotated[int, Field(ge=1)] = KMeansDefaults.K
    seed: int = 0
    max_iter: Annotated[int, Field(ge=1)] = KMeansDefaults.MAX_ITER
    tol: Annotated[float, Field(ge=0.0)] = KMeansDefaults.TOL
    max_train_descriptors: Annotated[int | None, Field(ge=1)] = None
    top_m: Annotated[int, Field(ge=1)] = DEFAULT_TOP_M

    @model_validator(mode="after")
    def check_ranges(self) -> PipelineConfig:
        """Cross-field bounds owned by the stage models."""
        if not self.r_min < self.r_max:
            raise ValueError(f"r_min {self.r_min} must be below r_max {self.r_max}")
        if self.canny_low > self.canny_high:
            raise ValueError(
                f"canny_low {self.canny_low} exceeds canny_high {self.canny_high}"
            )
        return self

    @property
    def seeds(self) -> SeedPlan:
        """Derived per-stage seeds."""
        return SeedPlan.from_seed(self.seed)

    def descriptor_config(self, n: int | None = None, color_weight: float | None = None) -> DescriptorConfig:
        """Build the per-image descriptor settings, optionally overriding n or w."""
        return DescriptorConfig(
            n=self.n if n is None else n,
            shape=ShapeContextParams(
                radial_bins=self.radial_bins,
                angular_bins=self.angular_bins,
                r_min=self.r_min,
                r_max=self.r_max,
                rotation_invariant=self.rotation_invariant,
            ),
            scale_space=ScaleSpaceParams(
                octaves=self.octaves,
                scales_per_octave=self.scales_per_octave,
                sigma0=self.sigma0,
                contrast_thresh=self.contrast_thresh,
                edge_thresh=self.edge_thresh,
                upsample=self.upsample,
            ),
            edges=EdgeParams(low=self.canny_low, high=self.canny_high, sigma=self.canny_sigma),
            color_weight=self.color_weight if color_weight is None else color_weight,
            second_moment=self.second_moment,
            seed=self.seeds.sampling,
            max_side=self.max_side,
        )


def load_config_file(path: str | Path) -> dict[str, str]:
    """
    Read a `key = value` config file.

    Blank lines and `#` comments are ignored. Keys must be PipelineConfig
    field names.

    Args:
        path: Config file location

    Returns:
        Raw string values by key

    Raises:
        ConfigFileNotFoundError: If the file does not exist
        ConfigValidationError: For unknown keys or keys without a value
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigFileNotFoundError(str(file_path))

    raw = dotenv_values(file_path, encoding="utf-8")
    values: dict[str, str] = {}
    for key, value in raw.items():
        name = key.strip().lower().replace("-", "_")
        if name not in PipelineConfig.model_fields:
            raise ConfigValidationError(name, value, f"unknown key in {file_path}")
        if value is None:
            raise ConfigValidationError(name, value, "missing value")
        values[name] = value.strip()
    return values


def resolve_pipeline_config(
    config_file: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> PipelineConfig:
    """
    Merge defaults, config-file values and explicit overrides.

    Overrides whose value is None are treated as "not given".

    Raises:
        ConfigurationError: When the merged values fail validation
    """
    merged: dict[str, Any] = {}
    if config_file is not None:
        merged.update(load_config_file(config_file))
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    try:
        return PipelineConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigurationError(
            f"Invalid pipeline configuration: {field}: {first['msg']}",
            context={"errors": e.error_count()},
        ) from None


# =============================================================================
# Main Settings
# =============================================================================


class AvifindSettings(BaseSettings):
    """
    Process-level settings, loaded from the environment.

    Environment variables (prefix AVIFIND_):
        AVIFIND_JOBS, AVIFIND_DEBUG, AVIFIND_LOG_LEVEL, AVIFIND_CONFIG_FILE
    """

    model_config = SettingsConfigDict(
        env_prefix="AVIFIND_",
        extra="ignore",
    )

    jobs: Annotated[int, Field(default=1, ge=1)]
    debug: bool = False
    log_level: Annotated[
        str, Field(default="INFO", pattern=r"^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    ]
    config_file: Path | None = None


# =============================================================================
# Singleton Settings Access
# =============================================================================

_settings: AvifindSettings | None = None


def get_settings() -> AvifindSettings:
    """
    Get the global settings instance.

    Creates a new instance on first call, returns cached instance thereafter.
    """
    global _settings
    if _settings is None:
        _settings = AvifindSettings()
    return _settings


def reset_settings() -> None:
    """Reset the global settings instance (useful for testing)."""
    global _settings
    _settings = None
