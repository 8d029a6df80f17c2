"""
Shared pytest fixtures: synthetic bird-like images and labelled corpora.

Images are flat-colored silhouettes (disk, square, triangle) on a dark
background with a seeded affine jitter and pixel noise, written with
Pillow into tmp_path.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest
from PIL import Image, ImageDraw

from avifind.core.config import reset_settings
from avifind.features.imaging import RasterImage

SHAPES = ("disk", "square", "triangle")
COLORS: dict[str, tuple[int, int, int]] = {
    "red": (230, 60, 60),
    "green": (60, 170, 60),
    "blue": (70, 90, 250),
}
BACKGROUND = (30, 30, 30)

ShapeFactory = Callable[..., Image.Image]
CorpusFactory = Callable[..., Path]


def draw_shape(
    shape: str,
    color: tuple[int, int, int],
    seed: int = 0,
    size: int = 96,
    jitter: bool = True,
    noise: float = 4.0,
) -> Image.Image:
    """Render one silhouette; jitter applies a seeded scale, rotation and shift."""
    rng = np.random.default_rng(seed)
    scale = 1.0 + rng.uniform(-0.08, 0.08) if jitter else 1.0
    angle = rng.uniform(-0.15, 0.15) if jitter else 0.0
    shift = rng.uniform(-3.0, 3.0, size=2) if jitter else np.zeros(2)
    cx, cy = size / 2 + shift[0], size / 2 + shift[1]
    radius = size * 0.28 * scale

    img = Image.new("RGB", (size, size), BACKGROUND)
    draw = ImageDraw.Draw(img)
    if shape == "disk":
        draw.ellipse([cx - radius, cy - radius, cx + radius, cy + radius], fill=color)
    else:
        corners, start, stretch = (4, math.pi / 4, 1.15) if shape == "square" else (3, -math.pi / 2, 1.3)
        vertices = [
            (
                cx + stretch * radius * math.cos(start + angle + 2 * math.pi * i / corners),
                cy + stretch * radius * math.sin(start + angle + 2 * math.pi * i / corners),
            )
            for i in range(corners)
        ]
        draw.polygon(vertices, fill=color)

    if noise <= 0:
        return img
    pixels = np.asarray(img, dtype=np.float64) + rng.normal(0.0, noise, (size, size, 3))
    return Image.fromarray(np.clip(np.round(pixels), 0, 255).astype(np.uint8))


def write_corpus(
    root: Path,
    classes: dict[str, list[Image.Image]],
    suffix: str = ".png",
) -> Path:
    """Write `root/<label>/img_XX<suffix>` for every image."""
    for label, images in classes.items():
        folder = root / label
        folder.mkdir(parents=True, exist_ok=True)
        for i, img in enumerate(images):
            img.save(folder / f"img_{i:02d}{suffix}")
    return root


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Isolate every test from AVIFIND_* variables and cached settings."""
    for name in ("AVIFIND_JOBS", "AVIFIND_DEBUG", "AVIFIND_LOG_LEVEL", "AVIFIND_CONFIG_FILE"):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def shape_image() -> ShapeFactory:
    """Factory rendering silhouettes as Pillow images."""
    return draw_shape


@pytest.fixture
def raster() -> Callable[..., RasterImage]:
    """Factory rendering silhouettes as RasterImage."""

    def make(
        shape: str = "disk",
        color: str = "red",
        seed: int = 0,
        size: int = 96,
        jitter: bool = True,
        noise: float = 4.0,
    ) -> RasterImage:
        img = draw_shape(shape, COLORS[color], seed=seed, size=size, jitter=jitter, noise=noise)
        return RasterImage(np.asarray(img, dtype=np.uint8).copy())

    return make


@pytest.fixture
def corpus_factory(tmp_path: Path) -> CorpusFactory:
    """
    Factory writing a shape x color corpus.

    Each class is `<shape>_<color>` with `per_class` jittered renderings.
    """

    def make(
        shapes: tuple[str, ...] = SHAPES,
        colors: tuple[str, ...] = tuple(COLORS),
        per_class: int = 3,
        size: int = 64,
        name: str = "corpus",
    ) -> Path:
        classes: dict[str, list[Image.Image]] = {}
        for s_idx, shape in enumerate(shapes):
            for c_idx, color in enumerate(colors):
                base = 1000 * s_idx + 100 * c_idx
                classes[f"{shape}_{color}"] = [
                    draw_shape(shape, COLORS[color], seed=base + i, size=size) for i in range(per_class)
                ]
        return write_corpus(tmp_path / name, classes)

    return make


@pytest.fixture
def small_corpus(corpus_factory: CorpusFactory) -> Path:
    """2 classes x 3 images of 64x64 pixels."""
    return corpus_factory(shapes=("disk", "triangle"), colors=("red",), per_class=3)


@pytest.fixture
def duplicate_corpus(tmp_path: Path) -> Path:
    """2 classes, each one image repeated 4 times."""
    red_disk = draw_shape("disk", COLORS["red"], seed=1, size=64)
    blue_triangle = draw_shape("triangle", COLORS["blue"], seed=2, size=64)
    return write_corpus(
        tmp_path / "duplicates",
        {"disk_red": [red_disk] * 4, "triangle_blue": [blue_triangle] * 4},
    )
