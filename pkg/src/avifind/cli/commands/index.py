"""
Index building command.

Quantizes every corpus image against a trained vocabulary and writes the
bag-of-words index.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console

from avifind.cli.utils import handle_errors, pipeline_config, progress_bar, resolve_jobs
from avifind.cli.utils.options import (
    AngularBinsOpt,
    CannyHighOpt,
    CannyLowOpt,
    ColorWeightOpt,
    ContrastOpt,
    CorpusOpt,
    EdgeRatioOpt,
    JobsOpt,
    MaxSideOpt,
    NOpt,
    OctavesOpt,
    PerClassOpt,
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
from avifind.core.exceptions import DimensionMismatchError
from avifind.features.pipeline import describe_sources
from avifind.retrieval.index import index_descriptor_sets, save_index
from avifind.retrieval.vocabulary import load_vocabulary
from avifind.services.corpus import scan_corpus

console = Console(stderr=True)

VocabOpt = Annotated[Path, typer.Option("--vocab", "-v", help="Vocabulary file from `avifind vocab`")]


def index(
    corpus: CorpusOpt,
    vocab: VocabOpt,
    out: Annotated[Path, typer.Option("--out", "-o", help="Index file to write")],
    n: NOpt = None,
    seed: SeedOpt = None,
    per_class: PerClassOpt = None,
    shape_only: ShapeOnlyOpt = False,
    color_weight: ColorWeightOpt = None,
    jobs: JobsOpt = None,
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
    """Build a bag-of-words index of a corpus.

    Use the same descriptor flags that trained the vocabulary.
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
            )
        )
        vocabulary = load_vocabulary(vocab)
        desc_config = cfg.descriptor_config()
        if desc_config.dimension != vocabulary.d:
            raise DimensionMismatchError(vocabulary.d, desc_config.dimension)

        manifest = scan_corpus(corpus, per_class_limit=per_class, seed=cfg.seed)
        sources = [(e.image_id, e.path) for e in manifest.entries]
        with progress_bar(len(sources), "Indexing", console) as advance:
            sets = describe_sources(sources, desc_config, jobs=resolve_jobs(jobs), on_progress=advance)

        labels = [e.label for e in manifest.entries]
        bow_index = index_descriptor_sets(list(zip(labels, sets)), vocabulary)
        save_index(bow_index, out)

    flagged = sum(1 for e in bow_index.entries if e.flagged)
    console.print(f"[green]Indexed {len(bow_index)} images (k={bow_index.k}) to {out}[/green]")
    if flagged:
        console.print(f"[yellow]{flagged} image(s) have no descriptors[/yellow]")
