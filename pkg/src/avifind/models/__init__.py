"""
Pydantic models for avifind.

Contains data models for:
- Pipeline parameters: edges, scale space, shape-context geometry
- Corpus: labelled image manifests
"""

from __future__ import annotations

from avifind.models.corpus import CorpusEntry, CorpusManifest
from avifind.models.params import (
    DescriptorConfig,
    EdgeParams,
    ScaleSpaceParams,
    SecondMoment,
    ShapeContextParams,
)

__all__ = [
    "CorpusEntry",
    "CorpusManifest",
    "DescriptorConfig",
    "EdgeParams",
    "ScaleSpaceParams",
    "SecondMoment",
    "ShapeContextParams",
]
