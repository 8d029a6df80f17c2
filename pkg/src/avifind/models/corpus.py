"""
Corpus models for dataset ingestion.

A manifest lists every image of a labelled collection (one class per
species directory) together with the identifier used by the index.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from avifind.utils.sanitize import validate_image_id


class CorpusEntry(BaseModel):
    """
    One labelled image file.

    Attributes:
        image_id: `<class>/<filename>`, unique within a manifest
        label: Class identifier (species)
        path: Location of the image file
    """

    model_config = ConfigDict(frozen=True)

    image_id: str = Field(min_length=1)
    label: str = Field(min_length=1)
    path: Path

    @field_validator("image_id", "label")
    @classmethod
    def no_control_chars(cls, v: str) -> str:
        """Ids and labels end up as TAB-separated fields."""
        return validate_image_id(v)


class CorpusManifest(BaseModel):
    """
    Ordered list of corpus entries under one root directory.

    Attributes:
        root: Directory the manifest was scanned from
        entries: Entries in deterministic (class, filename) order
    """

    model_config = ConfigDict(frozen=True)

    root: Path
    entries: list[CorpusEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_entries(self) -> CorpusManifest:
        """Image ids are unique and every file exists."""
        seen: set[str] = set()
        for entry in self.entries:
            if entry.image_id in seen:
                raise ValueError(f"duplicate image id '{entry.image_id}'")
            seen.add(entry.image_id)
            if not entry.path.is_file():
                raise ValueError(f"missing image file '{entry.path}'")
        return self

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> list[str]:
        """Sorted distinct class labels."""
        return sorted({e.label for e in self.entries})

    def class_counts(self) -> dict[str, int]:
        """Number of images per class."""
        return dict(sorted(Counter(e.label for e in self.entries).items()))
