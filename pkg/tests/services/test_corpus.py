"""
Tests for corpus scanning.
"""

from __future__ import annotations

import logging
from pathlib import Path

import pytest
from PIL import Image

from avifind.core.exceptions import (
    ConfigValidationError,
    CorpusNotFoundError,
    NoClassesFoundError,
)
from avifind.services.corpus import corpus_base, scan_corpus


def _touch_image(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", (4, 4), (0, 0, 0)).save(path)


class TestScanCorpus:
    """Tests for scan_corpus."""

    def test_class_directories(self, small_corpus: Path) -> None:
        """2 classes x 3 images give 6 entries in (class, file) order."""
        manifest = scan_corpus(small_corpus)

        assert len(manifest) == 6
        assert manifest.labels == ["disk_red", "triangle_red"]
        assert manifest.entries[0].image_id == "disk_red/img_00.png"
        assert [e.image_id for e in manifest.entries] == sorted(e.image_id for e in manifest.entries)
        assert manifest.class_counts() == {"disk_red": 3, "triangle_red": 3}

    def test_per_class_limit(self, tmp_path: Path) -> None:
        """A 60-image class limited to 30 keeps 30 distinct files."""
        for i in range(60):
            _touch_image(tmp_path / "big" / f"b{i:02d}.png")
        for i in range(5):
            _touch_image(tmp_path / "small" / f"s{i}.png")

        manifest = scan_corpus(tmp_path, per_class_limit=30, seed=4)

        assert manifest.class_counts() == {"big": 30, "small": 5}
        big = [e.image_id for e in manifest.entries if e.label == "big"]
        assert big == sorted(big)

    def test_limit_is_seeded(self, tmp_path: Path) -> None:
        for i in range(20):
            _touch_image(tmp_path / "c" / f"{i:02d}.png")

        first = scan_corpus(tmp_path, per_class_limit=5, seed=1)
        again = scan_corpus(tmp_path, per_class_limit=5, seed=1)

        assert [e.image_id for e in first.entries] == [e.image_id for e in again.entries]

    def test_missing_root(self, tmp_path: Path) -> None:
        with pytest.raises(CorpusNotFoundError):
            scan_corpus(tmp_path / "nowhere")

    def test_no_images(self, tmp_path: Path) -> None:
        (tmp_path / "empty_class").mkdir()
        (tmp_path / "notes.txt").write_text("hello")
        with pytest.raises(NoClassesFoundError):
            scan_corpus(tmp_path)

    def test_empty_class_is_skipped(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        _touch_image(tmp_path / "heron" / "h1.png")
        (tmp_path / "wren").mkdir()

        with caplog.at_level(logging.WARNING):
            manifest = scan_corpus(tmp_path)

        assert manifest.labels == ["heron"]
        assert "wren" in caplog.text

    def test_non_image_files_ignored(self, tmp_path: Path) -> None:
        _touch_image(tmp_path / "heron" / "h1.png")
        (tmp_path / "heron" / "README.txt").write_text("not an image")
        (tmp_path / "heron" / ".hidden.png").write_bytes(b"")

        assert [e.image_id for e in scan_corpus(tmp_path).entries] == ["heron/h1.png"]

    def test_flat_names(self, tmp_path: Path) -> None:
        """`<class>__<file>` names are split into label and filename."""
        _touch_image(tmp_path / "cardinal__c1.png")
        _touch_image(tmp_path / "cardinal__c2.png")
        _touch_image(tmp_path / "jay__j1.jpg")
        _touch_image(tmp_path / "unlabelled.png")

        manifest = scan_corpus(tmp_path)

        assert [e.image_id for e in manifest.entries] == [
            "cardinal/c1.png",
            "cardinal/c2.png",
            "jay/j1.jpg",
        ]

    def test_cub_layout(self, tmp_path: Path) -> None:
        """A CUB checkout keeps its classes under images/."""
        _touch_image(tmp_path / "images" / "001.Black_footed_Albatross" / "a.jpg")
        _touch_image(tmp_path / "images" / "002.Laysan_Albatross" / "b.jpg")
        (tmp_path / "attributes").mkdir()

        manifest = scan_corpus(tmp_path)

        assert corpus_base(tmp_path) == tmp_path / "images"
        assert manifest.labels == ["001.Black_footed_Albatross", "002.Laysan_Albatross"]
        assert manifest.root == tmp_path

    def test_bad_limit(self, small_corpus: Path) -> None:
        with pytest.raises(ConfigValidationError):
            scan_corpus(small_corpus, per_class_limit=0)
