"""
Output utilities for CLI commands.

Provides progress bars, result tables and the TSV lines of `query`.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from enum import Enum

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from avifind.evaluation.grid import EvalReport
from avifind.retrieval.index import RetrievalResult

# Default console
_console = Console(stderr=True)


class OutputFormat(str, Enum):
    """Output format of query results."""

    TSV = "tsv"
    TABLE = "table"


@contextmanager
def progress_bar(
    total: int,
    description: str,
    console: Console | None = None,
) -> Iterator[Callable[[int], None]]:
    """Show a transient progress bar and yield its advance callback.

    Args:
        total: Expected number of steps
        description: Label shown left of the bar
        console: Console to draw on (stderr by default)
    """
    console = console or _console
    with Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task(description, total=total)
        yield lambda steps: progress.advance(task, steps)


def format_precision(value: float) -> str:
    """Format a precision value for tables."""
    if math.isnan(value):
        return "[dim]n/a[/dim]"
    return f"{value:.4f}"


def tsv_lines(result: RetrievalResult) -> list[str]:
    """`rank<TAB>image_id<TAB>label<TAB>distance` lines, ranks from 1."""
    return [
        f"{rank}\t{hit.image_id}\t{hit.label}\t{hit.distance:.6f}"
        for rank, hit in enumerate(result.ranked, start=1)
    ]


def results_table(result: RetrievalResult) -> Table:
    """Rich table of ranked query hits."""
    title = f"Matches for {result.query_id}" if result.query_id else "Matches"
    table = Table(title=f"{title} ({len(result)})")
    table.add_column("Rank", style="dim", justify="right", no_wrap=True)
    table.add_column("Image", style="cyan")
    table.add_column("Label")
    table.add_column("Distance", justify="right")
    for rank, hit in enumerate(result.ranked, start=1):
        table.add_row(str(rank), hit.image_id, hit.label, f"{hit.distance:.6f}")
    return table


def report_table(report: EvalReport) -> Table:
    """
    Grid table: one row per (n, variant), one column per k.

    A final block holds the per (k, variant) average over n.
    """
    ks = list(dict.fromkeys(c.k for c in report.cells))
    ns = list(dict.fromkeys(c.n for c in report.cells))
    variants = list(dict.fromkeys(c.variant for c in report.cells))

    table = Table(title=f"Mean precision at {report.top_m} ({report.protocol.value})")
    table.add_column("n", justify="right", no_wrap=True)
    table.add_column("Variant", style="cyan")
    for k in ks:
        table.add_column(f"k={k}", justify="right")

    for n in ns:
        for variant in variants:
            row = [str(n), variant.value]
            for k in ks:
                row.append(format_precision(report.cell(k, n, variant).mean_precision))
            table.add_row(*row)

    averages = report.averages()
    table.add_section()
    for variant in variants:
        row = ["avg", variant.value]
        row.extend(format_precision(averages[(k, variant.value)]) for k in ks)
        table.add_row(*row, style="bold")
    return table
