"""
Option declarations shared by the pipeline commands.

Every pipeline flag defaults to None, meaning "not given"; the value then
comes from the config file or the built-in default.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Annotated, Any

import typer


class MomentChoice(str, Enum):
    """Second color moment fused into the descriptor."""

    VARIANCE = "variance"
    STD = "std"


# =============================================================================
# Corpus and Descriptor Flags
# =============================================================================

CorpusOpt = Annotated[
    Path, typer.Option("--corpus", help="Corpus root (class subdirectories or CUB-200 checkout)")
]
PerClassOpt = Annotated[
    int | None, typer.Option("--per-class", min=1, help="Keep at most N images per class")
]
NOpt = Annotated[int | None, typer.Option("--n", min=2, help="Contour points sampled per image")]
SeedOpt = Annotated[int | None, typer.Option("--seed", help="Seed for sampling, k-means++ and shuffling")]
ShapeOnlyOpt = Annotated[
    bool, typer.Option("--shape-only", help="Drop the color block (color weight 0)")
]
ColorWeightOpt = Annotated[
    float | None, typer.Option("--color-weight", min=0.0, help="Weight w of the color moments")
]
JobsOpt = Annotated[
    int | None,
    typer.Option("--jobs", "-j", min=1, envvar="AVIFIND_JOBS", help="Worker processes"),
]

# =============================================================================
# Pipeline Tunables
# =============================================================================

RadialBinsOpt = Annotated[int | None, typer.Option("--radial-bins", min=1, help="Radial bins R")]
AngularBinsOpt = Annotated[int | None, typer.Option("--angular-bins", min=1, help="Angular bins A")]
RMinOpt = Annotated[float | None, typer.Option("--r-min", help="Innermost radial edge (units of alpha)")]
RMaxOpt = Annotated[float | None, typer.Option("--r-max", help="Outer radius (units of alpha)")]
RotationOpt = Annotated[
    bool | None,
    typer.Option(
        "--rotation-invariant/--no-rotation-invariant",
        help="Measure angles from the local boundary direction",
        show_default=False,
    ),
]
OctavesOpt = Annotated[int | None, typer.Option("--octaves", min=1, help="DoG octaves")]
ScalesOpt = Annotated[int | None, typer.Option("--scales", min=3, help="DoG scales per octave")]
Sigma0Opt = Annotated[float | None, typer.Option("--sigma0", help="Base sigma of each octave")]
ContrastOpt = Annotated[float | None, typer.Option("--contrast", help="DoG contrast threshold")]
EdgeRatioOpt = Annotated[float | None, typer.Option("--edge-ratio", help="DoG edge-response ratio limit")]
CannyLowOpt = Annotated[float | None, typer.Option("--canny-low", help="Canny low threshold")]
CannyHighOpt = Annotated[float | None, typer.Option("--canny-high", help="Canny high threshold")]
MaxSideOpt = Annotated[
    int | None, typer.Option("--max-side", min=16, help="Down-scale images to this longer side")
]
SecondMomentOpt = Annotated[
    MomentChoice | None, typer.Option("--second-moment", help="Second color moment to fuse")
]
MaxIterOpt = Annotated[int | None, typer.Option("--max-iter", min=1, help="Maximum k-means iterations")]
TolOpt = Annotated[float | None, typer.Option("--tol", help="Relative centroid-shift tolerance")]
MaxTrainOpt = Annotated[
    int | None, typer.Option("--max-train", min=1, help="Subsample training descriptors to N")
]


def pipeline_overrides(
    *,
    n: int | None = None,
    seed: int | None = None,
    shape_only: bool = False,
    color_weight: float | None = None,
    radial_bins: int | None = None,
    angular_bins: int | None = None,
    r_min: float | None = None,
    r_max: float | None = None,
    rotation_invariant: bool | None = None,
    octaves: int | None = None,
    scales: int | None = None,
    sigma0: float | None = None,
    contrast: float | None = None,
    edge_ratio: float | None = None,
    canny_low: float | None = None,
    canny_high: float | None = None,
    max_side: int | None = None,
    second_moment: MomentChoice | None = None,
    max_iter: int | None = None,
    tol: float | None = None,
    max_train: int | None = None,
    **extra: Any,
) -> dict[str, Any]:
    """
    Map CLI flag values onto PipelineConfig field names.

    --shape-only wins over --color-weight.
    """
    overrides: dict[str, Any] = {
        "n": n,
        "seed": seed,
        "color_weight": 0.0 if shape_only else color_weight,
        "radial_bins": radial_bins,
        "angular_bins": angular_bins,
        "r_min": r_min,
        "r_max": r_max,
        "rotation_invariant": rotation_invariant,
        "octaves": octaves,
        "scales_per_octave": scales,
        "sigma0": sigma0,
        "contrast_thresh": contrast,
        "edge_thresh": edge_ratio,
        "canny_low": canny_low,
        "canny_high": canny_high,
        "max_side": max_side,
        "second_moment": second_moment.value if second_moment is not None else None,
        "max_iter": max_iter,
        "tol": tol,
        "max_train_descriptors": max_train,
    }
    overrides.update(extra)
    return overrides
