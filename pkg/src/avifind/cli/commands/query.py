"""
Query command.

Describes one image and ranks the indexed images by L1 distance between
word histograms. TSV results go to stdout.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console

from avifind.cli.utils import (
    OutputFormat,
    handle_errors,
    pipeline_config,
    results_table,
    tsv_lines,
)
from avifind.cli.utils.options import (
    AngularBinsOpt,
    CannyHighOpt,
    CannyLowOpt,
    ColorWeightOpt,
    ContrastOpt,
    EdgeRatioOpt,
    MaxSideOpt,
    NOpt,
    OctavesOpt,
    RadialBinsOpt,
    RMaxOpt,
    RMinOpt,
    RotationOpt,
    ScalesOpt,
    SecondMomentOpt,
    SeedOpt,
    ShapeOnlyOpt,
    Sigma0Opt,
    pipeline_overrides,
)
from avifind.features.descriptors import describe_image
from avifind.features.imaging import load_image
from avifind.retrieval.index import load_index, quantize
from avifind.retrieval.index import query as rank_index
from avifind.retrieval.vocabulary import load_vocabulary

console = Console(stderr=True)
out_console = Console()


def query(
    index: Annotated[Path, typer.Option("--index", "-i", help="Index file from `avifind index`")],
    vocab: Annotated[Path, typer.Option("--vocab", "-v", help="Vocabulary the index was built with")],
    image: Annotated[Path, typer.Option("--image", help="Query image")],
    top: Annotated[int | None, typer.Option("--top", "-m", min=1, help="Number of results")] = None,
    fmt: Annotated[
        OutputFormat, typer.Option("--format", "-f", help="Output format")
    ] = OutputFormat.TSV,
    force: Annotated[
        bool, typer.Option("--force", help="Accept an index built with a different vocabulary")
    ] = False,
    n: NOpt = None,
    seed: SeedOpt = None,
    shape_only: ShapeOnlyOpt = False,
    color_weight: ColorWeightOpt = None,
    radial_bins: RadialBinsOpt = None,
    angular_bins: AngularBinsOpt = None,
    r_min: RMinOpt = None,
    r_max: RMaxOpt = None,
    rotation_invariant: RotationOpt = None,
    octaves: OctavesOpt = None,
    scales: ScalesOpt = None,
    sigma0: Sigma0Opt = None,
    contrast: ContrastOpt = None,
    edge_ratio: EdgeRatioOpt = None,
    canny_low: CannyLowOpt = None,
    canny_high: CannyHighOpt = None,
    max_side: MaxSideOpt = None,
    second_moment: SecondMomentOpt = None,
) -> None:
    """Find the indexed images closest to a query image.

    Prints `rank<TAB>image_id<TAB>label<TAB>distance` lines.
    """
    with handle_errors(console):
        cfg = pipeline_config(
            pipeline_overrides(
                n=n,
                seed=seed,
                shape_only=shape_only,
                color_weight=color_weight,
                radial_bins=radial_bins,
                angular_bins=angular_bins,
                r_min=r_min,
                r_max=r_max,
                rotation_invariant=rotation_invariant,
                octaves=octaves,
                scales=scales,
                sigma0=sigma0,
                contrast=contrast,
                edge_ratio=edge_ratio,
                canny_low=canny_low,
                canny_high=canny_high,
                max_side=max_side,
                second_moment=second_moment,
                top_m=top,
            )
        )
        vocabulary = load_vocabulary(vocab)
        bow_index = load_index(index, vocabulary, allow_mismatch=force)

        query_id = image.name
        ds = describe_image(load_image(image), cfg.descriptor_config(), image_id=query_id)
        if ds.empty_reason is not None:
            console.print(f"[yellow]Query image has no descriptors ({ds.empty_reason.value})[/yellow]")
        result = rank_index(quantize(ds, vocabulary), bow_index, cfg.top_m, query_id=query_id)

    if fmt == OutputFormat.TABLE:
        out_console.print(results_table(result))
        return
    for line in tsv_lines(result):
        typer.echo(line)
