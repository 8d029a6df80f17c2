"""
CLI utility modules for shared functionality.

Provides common utilities used across CLI commands:
- helpers: Error reporting, configuration assembly, list parsing
- options: Shared option declarations
- output: Progress bars, tables, TSV rendering
"""

from avifind.cli.utils.helpers import (
    handle_errors,
    int_list,
    name_list,
    pipeline_config,
    resolve_jobs,
)
from avifind.cli.utils.output import (
    OutputFormat,
    format_precision,
    progress_bar,
    report_table,
    results_table,
    tsv_lines,
)

__all__ = [
    "OutputFormat",
    "format_precision",
    # Helpers
    "handle_errors",
    "int_list",
    "name_list",
    "pipeline_config",
    # Output
    "progress_bar",
    "report_table",
    "resolve_jobs",
    "results_table",
    "tsv_lines",
]
