"""
Vocabulary training command.

Describes every corpus image and clusters the pooled descriptors into k
visual words.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated

import numpy as np
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
    MaxIterOpt,
    MaxSideOpt,
    MaxTrainOpt,
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
    TolOpt,
    pipeline_overrides,
)
from avifind.features.pipeline import describe_sources
from avifind.retrieval.vocabulary import save_vocabulary, subsample_descriptors, train_kmeans
from avifind.services.corpus import scan_corpus

console = Console(stderr=True)


def vocab(
    corpus: CorpusOpt,
    out: Annotated[Path, typer.Option("--out", "-o", help="Vocabulary file to write")],
    k: Annotated[int | None, typer.Option("--k", min=1, help="Number of visual words")] = None,
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
    max_iter: MaxIterOpt = None,
    tol: TolOpt = None,
    max_train: MaxTrainOpt = None,
) -> None:
    """Train a visual vocabulary from a labelled corpus."""
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
                max_iter=max_iter,
                tol=tol,
                max_train=max_train,
                k=k,
            )
        )
        manifest = scan_corpus(corpus, per_class_limit=per_class, seed=cfg.seed)
        desc_config = cfg.descriptor_config()
        sources = [(e.image_id, e.path) for e in manifest.entries]

        with progress_bar(len(sources), "Describing", console) as advance:
            sets = describe_sources(sources, desc_config, jobs=resolve_jobs(jobs), on_progress=advance)

        blocks = [ds.matrix for ds in sets if not ds.is_empty]
        pooled = np.vstack(blocks) if blocks else np.zeros((0, desc_config.dimension))
        training = subsample_descriptors(pooled, cfg.max_train_descriptors, cfg.seeds.subsample)

        with console.status(f"Clustering {training.shape[0]} descriptors into {cfg.k} words"):
            vocabulary = train_kmeans(
                training, k=cfg.k, seed=cfg.seeds.kmeans, max_iter=cfg.max_iter, tol=cfg.tol
            )
        fingerprint = save_vocabulary(vocabulary, out)

    console.print(
        f"[green]Wrote {vocabulary.k} words (d={vocabulary.d}) to {out}[/green] "
        f"[dim]{fingerprint[:12]}[/dim]"
    )
