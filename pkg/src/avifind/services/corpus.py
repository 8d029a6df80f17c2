"""
Corpus ingestion.

Scans a labelled image collection laid out as one directory per class
(`<root>/<class>/<file>`, or a CUB-200-2011 checkout with an `images/`
subdirectory) or as flat `<class>__<file>` names, into a CorpusManifest.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from avifind.constants import SUPPORTED_EXTENSIONS
from avifind.core.config import SeedPlan
from avifind.core.exceptions import (
    ConfigValidationError,
    CorpusError,
    CorpusNotFoundError,
    NoClassesFoundError,
)
from avifind.models.corpus import CorpusEntry, CorpusManifest
from avifind.utils.sanitize import make_image_id, split_flat_name

logger = logging.getLogger(__name__)

CUB_IMAGES_DIR = "images"


def _is_image(path: Path) -> bool:
    return path.is_file() and path.suffix.lower() in SUPPORTED_EXTENSIONS and not path.name.startswith(".")


def corpus_base(root: Path) -> Path:
    """Directory holding the class folders: `root/images` when present, else root."""
    nested = root / CUB_IMAGES_DIR
    return nested if nested.is_dir() else root


def _collect(base: Path) -> dict[str, list[tuple[str, Path]]]:
    groups: dict[str, list[tuple[str, Path]]] = defaultdict(list)
    for child in sorted(base.iterdir()):
        if child.is_dir():
            files = sorted(f for f in child.iterdir() if _is_image(f))
            if not files:
                logger.warning("Skipping empty class directory: %s", child.name)
                continue
            groups[child.name].extend((f.name, f) for f in files)
        elif _is_image(child):
            parts = split_flat_name(child.name)
            if parts is None:
                logger.debug("Ignoring unlabelled file: %s", child.name)
                continue
            label, filename = parts
            groups[label].append((filename, child))
    return groups


def scan_corpus(
    root: str | Path,
    per_class_limit: int | None = None,
    seed: int = 0,
) -> CorpusManifest:
    """
    Build a manifest of every labelled image under root.

    Classes and files are visited in lexicographic order. With
    per_class_limit, each larger class is shuffled with the corpus seed and
    its first `limit` files are kept (then re-sorted).

    Args:
        root: Corpus directory
        per_class_limit: Maximum images per class
        seed: Pipeline seed; the shuffle uses its derived corpus seed

    Returns:
        Manifest with image ids `<class>/<filename>`

    Raises:
        CorpusNotFoundError: If root is not a directory
        NoClassesFoundError: If no class holds any image
        CorpusError: If two files map to the same image id
    """
    root_path = Path(root)
    if not root_path.is_dir():
        raise CorpusNotFoundError(str(root_path))
    if per_class_limit is not None and per_class_limit < 1:
        raise ConfigValidationError("per_class_limit", per_class_limit, "must be at least 1")

    base = corpus_base(root_path)
    groups = _collect(base)
    if not groups:
        raise NoClassesFoundError(str(root_path))

    rng = np.random.default_rng(SeedPlan.from_seed(seed).shuffle)
    selected: list[tuple[str, str, Path]] = []
    for label in sorted(groups):
        files = sorted(groups[label])
        if per_class_limit is not None and len(files) > per_class_limit:
            keep = rng.permutation(len(files))[:per_class_limit]
            files = sorted(files[i] for i in keep)
        selected.extend((label, name, path) for name, path in files)

    try:
        entries = [
            CorpusEntry(image_id=make_image_id(label, name), label=label, path=path)
            for label, name, path in selected
        ]
        manifest = CorpusManifest(root=root_path, entries=entries)
    except ValidationError as e:
        raise CorpusError(f"Invalid corpus under {root_path}: {e.errors()[0]['msg']}") from None
    except ValueError as e:
        raise CorpusError(f"Invalid corpus under {root_path}: {e}") from None

    logger.info("Scanned %d images in %d classes from %s", len(manifest), len(groups), base)
    return manifest
