"""
Main CLI entry point for avifind.

Provides the `avifind` command with subcommands for:
- vocab: Train a visual vocabulary from a labelled corpus
- index: Build a bag-of-words index of a corpus
- query: Rank indexed images against a query image
- eval: Evaluate retrieval precision over a (k, n, variant) grid
- info: Show settings and the effective pipeline configuration
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.logging import RichHandler

from avifind import __version__
from avifind.cli.commands import evaluate, index, query, vocab
from avifind.cli.utils import handle_errors, pipeline_config
from avifind.core.config import get_settings

# Main CLI app
app = typer.Typer(
    name="avifind",
    help="Bird image retrieval with fused shape-context and color descriptors",
    no_args_is_help=True,
    rich_markup_mode="rich",
)

# Logs and status go to stderr; stdout carries query results only
console = Console(stderr=True)


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"avifind version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            "-V",
            callback=version_callback,
            is_eager=True,
            help="Show version and exit",
        ),
    ] = False,
    debug: Annotated[
        bool,
        typer.Option(
            "--debug",
            "-d",
            envvar="AVIFIND_DEBUG",
            help="Enable debug output",
        ),
    ] = False,
    config_file: Annotated[
        Path | None,
        typer.Option(
            "--config",
            "-c",
            help="Pipeline config file (key = value lines)",
        ),
    ] = None,
) -> None:
    """
    avifind - content-based bird image retrieval.

    Trains a visual vocabulary over fused shape-context and color-moment
    descriptors, indexes a corpus, answers queries and evaluates precision.
    """
    settings = get_settings()
    if debug:
        settings.debug = True
    if config_file is not None:
        settings.config_file = config_file

    # Configure logging
    level = logging.DEBUG if settings.debug else getattr(logging, settings.log_level)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=settings.debug, rich_tracebacks=True)],
    )


# Register commands
app.command("vocab", help="Train a visual vocabulary")(vocab.vocab)
app.command("index", help="Build a bag-of-words index")(index.index)
app.command("query", help="Query an index with an image")(query.query)
app.command("eval", help="Evaluate retrieval precision")(evaluate.evaluate)


@app.command()
def info() -> None:
    """Show settings and the effective pipeline configuration."""
    settings = get_settings()
    with handle_errors(console):
        cfg = pipeline_config({})

    console.print("\n[bold]Settings:[/bold]")
    console.print(f"  Jobs: {settings.jobs}")
    console.print(f"  Debug mode: {settings.debug}")
    console.print(f"  Log level: {settings.log_level}")
    console.print(f"  Config file: {settings.config_file or 'not set'}")

    console.print("\n[bold]Pipeline:[/bold]")
    for name, value in cfg.model_dump().items():
        console.print(f"  {name} = {value}")


def cli() -> None:
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    cli()
