"""
Batch description of image files.

Runs load_image + describe_image over many files, optionally in a process
pool. Results always come back in input order.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from avifind.core.exceptions import ImageError
from avifind.features.descriptors import DescriptorSet, EmptyReason, describe_image
from avifind.features.imaging import load_image
from avifind.models.params import DescriptorConfig

logger = logging.getLogger(__name__)

Source = tuple[str, Path]
ProgressCallback = Callable[[int], None]


def describe_file(image_id: str, path: str | Path, config: DescriptorConfig) -> DescriptorSet:
    """
    Decode and describe one file.

    Unreadable files give an empty set flagged UNREADABLE instead of raising.
    """
    try:
        img = load_image(path)
    except ImageError as e:
        logger.warning("Skipping %s: %s", image_id, e.message)
        return DescriptorSet.empty(image_id, config.dimension, EmptyReason.UNREADABLE)
    return describe_image(img, config, image_id=image_id)


def _describe_job(job: tuple[str, str, DescriptorConfig]) -> DescriptorSet:
    image_id, path, config = job
    return describe_file(image_id, path, config)


def describe_sources(
    sources: Sequence[Source],
    config: DescriptorConfig,
    jobs: int = 1,
    on_progress: ProgressCallback | None = None,
) -> list[DescriptorSet]:
    """
    Describe many images.

    Args:
        sources: (image_id, path) pairs
        config: Descriptor settings shared by every image
        jobs: Worker processes; 1 runs in-process
        on_progress: Called with 1 after each finished image

    Returns:
        One DescriptorSet per source, in input order
    """
    work = [(image_id, str(path), config) for image_id, path in sources]
    results: list[DescriptorSet] = []

    if jobs <= 1 or len(work) <= 1:
        for job in work:
            results.append(_describe_job(job))
            if on_progress:
                on_progress(1)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for result in pool.map(_describe_job, work, chunksize=max(1, len(work) // (jobs * 4))):
                results.append(result)
                if on_progress:
                    on_progress(1)

    empty = sum(1 for ds in results if ds.is_empty)
    if empty:
        logger.warning("%d of %d images yielded no descriptors", empty, len(results))
    logger.debug("Described %d images with %d job(s)", len(results), jobs)
    return results
