"""
Core module for avifind.

Contains configuration management and the exception hierarchy.
"""

from __future__ import annotations

from avifind.core.config import (
    AvifindSettings,
    PipelineConfig,
    SeedPlan,
    get_settings,
    load_config_file,
    resolve_pipeline_config,
)
from avifind.core.exceptions import (
    AvifindError,
    ConfigurationError,
    FileFormatError,
    ImageError,
)

__all__ = [
    "AvifindError",
    "AvifindSettings",
    "ConfigurationError",
    "FileFormatError",
    "ImageError",
    "PipelineConfig",
    "SeedPlan",
    "get_settings",
    "load_config_file",
    "resolve_pipeline_config",
]
