"""Tests for the exception hierarchy."""

from __future__ import annotations

import pytest

from avifind.core.exceptions import (
    AvifindError,
    ConfigurationError,
    ConfigValidationError,
    CorruptImageError,
    DimensionMismatchError,
    EmptyIndexError,
    FileFormatError,
    FingerprintMismatchError,
    ImageError,
    InsufficientDescriptorsError,
    MalformedRecordError,
    RetrievalError,
)


class TestAvifindError:
    """Tests for the base error."""

    def test_message_only(self) -> None:
        assert str(AvifindError("boom")) == "boom"

    def test_context_is_appended(self) -> None:
        err = AvifindError("boom", context={"k": 3})
        assert str(err) == "boom (k=3)"
        assert err.context == {"k": 3}


class TestHierarchy:
    """Every error can be caught as AvifindError."""

    @pytest.mark.parametrize(
        ("error", "parent"),
        [
            (ConfigValidationError("n", 1, "too small"), ConfigurationError),
            (CorruptImageError("a.jpg", "truncated"), ImageError),
            (MalformedRecordError("idx.txt", 4, "bad"), FileFormatError),
            (FingerprintMismatchError("a" * 64, "b" * 64), FileFormatError),
            (EmptyIndexError(), RetrievalError),
        ],
    )
    def test_parents(self, error: AvifindError, parent: type[AvifindError]) -> None:
        assert isinstance(error, parent)
        assert isinstance(error, AvifindError)


class TestDetails:
    """Tests for error attributes and messages."""

    def test_malformed_record_names_line(self) -> None:
        err = MalformedRecordError("index.txt", 7, "expected 4 fields")
        assert err.line_no == 7
        assert "index.txt:7" in str(err)

    def test_fingerprints_are_shortened(self) -> None:
        err = FingerprintMismatchError("a" * 64, "b" * 64)
        assert "a" * 12 in str(err)
        assert "a" * 13 not in str(err)

    def test_insufficient_descriptors(self) -> None:
        err = InsufficientDescriptorsError(k=10, distinct=4)
        assert (err.k, err.distinct) == (10, 4)

    def test_dimension_mismatch(self) -> None:
        assert "66" in str(DimensionMismatchError(66, 30))
