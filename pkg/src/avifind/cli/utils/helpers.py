"""
Helper utilities for CLI commands.

Provides error reporting, pipeline configuration assembly and parsing of
comma-separated list flags.
"""

from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import typer
from rich.console import Console
from rich.markup import escape

from avifind.core.config import PipelineConfig, get_settings, resolve_pipeline_config
from avifind.core.exceptions import AvifindError
from avifind.utils.conversion import parse_int_list, parse_name_list

# Default console for error output
_console = Console(stderr=True)


@contextmanager
def handle_errors(console: Console | None = None) -> Iterator[None]:
    """Turn avifind and file-system errors into one red line and exit status 1.

    Args:
        console: Console for error output (uses the stderr console if None)

    Raises:
        typer.Exit: On any AvifindError or OSError raised inside the block
    """
    console = console or _console
    try:
        yield
    except AvifindError as e:
        console.print(f"[red]Error: {escape(_one_line(str(e)))}[/red]", soft_wrap=True)
        raise typer.Exit(1) from None
    except OSError as e:
        console.print(f"[red]Error: {escape(_one_line(str(e)))}[/red]", soft_wrap=True)
        raise typer.Exit(1) from None


def _one_line(message: str) -> str:
    return " ".join(message.split())


def pipeline_config(overrides: dict[str, Any]) -> PipelineConfig:
    """Resolve flags against the config file (from --config) and defaults.

    Args:
        overrides: Flag values by PipelineConfig field; None means not given

    Returns:
        Validated pipeline configuration

    Raises:
        ConfigurationError: If the config file or merged values are invalid
    """
    return resolve_pipeline_config(get_settings().config_file, overrides)


def resolve_jobs(jobs: int | None) -> int:
    """Worker count from the flag, else from AVIFIND_JOBS settings."""
    return jobs if jobs is not None else get_settings().jobs


def int_list(value: str | None) -> list[int] | None:
    """Typer callback parsing `200,300,400` into integers."""
    if value is None:
        return None
    try:
        numbers = parse_int_list(value)
    except ValueError as e:
        raise typer.BadParameter(f"Invalid integer list '{value}': {e}") from None
    if any(number < 1 for number in numbers):
        raise typer.BadParameter(f"Values must be positive: {value}")
    return numbers


def name_list(value: str | None) -> list[str] | None:
    """Typer callback parsing `fused,shape` into names."""
    if value is None:
        return None
    try:
        return parse_name_list(value)
    except ValueError as e:
        raise typer.BadParameter(str(e)) from None
