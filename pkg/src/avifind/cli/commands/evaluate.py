"""
Evaluation command.

Runs the (k, n, variant) retrieval grid over a labelled corpus and writes
the mean precision report, plus optional interpolated PR curves.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.markup import escape

from avifind.cli.utils import (
    handle_errors,
    int_list,
    name_list,
    pipeline_config,
    progress_bar,
    report_table,
    resolve_jobs,
)
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
    OctavesOpt,
    PerClassOpt,
    RadialBinsOpt,
    RMaxOpt,
    RMinOpt,
    RotationOpt,
    ScalesOpt,
    SecondMomentOpt,
    SeedOpt,
    Sigma0Opt,
    TolOpt,
    pipeline_overrides,
)
from avifind.evaluation.grid import Protocol, Variant, run_grid
from avifind.services.corpus import scan_corpus

console = Console(stderr=True)


def evaluate(
    corpus: CorpusOpt,
    out: Annotated[Path, typer.Option("--out", "-o", help="Report CSV to write")],
    k_values: Annotated[
        str | None, typer.Option("--k", help="Vocabulary sizes, e.g. 200,300,400")
    ] = None,
    n_values: Annotated[
        str | None, typer.Option("--n", help="Contour point counts, e.g. 200,300,400")
    ] = None,
    variants: Annotated[
        str, typer.Option("--variants", help="Descriptor variants: fused, shape")
    ] = "fused,shape",
    curves: Annotated[
        Path | None, typer.Option("--curves", help="Also write interpolated PR curves")
    ] = None,
    per_class: PerClassOpt = None,
    seed: SeedOpt = None,
    seeds: Annotated[
        str | None, typer.Option("--seeds", help="Average over several seeds, e.g. 0,1,2")
    ] = None,
    top: Annotated[int | None, typer.Option("--top", "-m", min=1, help="Precision cutoff")] = None,
    protocol: Annotated[
        Protocol, typer.Option("--protocol", help="Query protocol")
    ] = Protocol.LEAVE_ONE_OUT,
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
    """Evaluate retrieval precision over a grid of k, n and variants."""
    ks = int_list(k_values)
    ns = int_list(n_values)
    seed_list = int_list(seeds) if seeds is not None else None
    names = name_list(variants) or []

    with handle_errors(console):
        chosen = [Variant.parse(name) for name in names]
        cfg = pipeline_config(
            pipeline_overrides(
                seed=seed,
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
                top_m=top,
            )
        )
        ks = ks or [cfg.k]
        ns = ns or [cfg.n]
        run_seeds = seed_list or [cfg.seed]

        manifest = scan_corpus(corpus, per_class_limit=per_class, seed=cfg.seed)
        total = len(manifest) * len(ns) * len(run_seeds)
        with progress_bar(total, "Describing", console) as advance:
            report = run_grid(
                manifest,
                ks,
                ns,
                variants=chosen,
                seeds=run_seeds,
                config=cfg,
                protocol=protocol,
                jobs=resolve_jobs(jobs),
                on_progress=advance,
            )
        report.write(out, curves)

    console.print(report_table(report))
    failed = [c for c in report.cells if not c.ok]
    for cell in failed:
        console.print(
            f"[yellow]k={cell.k} n={cell.n} {cell.variant.value} failed: {escape(cell.error or '')}[/yellow]",
            soft_wrap=True,
        )
    console.print(f"[green]Wrote {len(report.cells)} cells to {out}[/green]")
    if curves is not None:
        console.print(f"[green]Wrote curves to {curves}[/green]")
