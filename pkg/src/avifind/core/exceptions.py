"""
Exception hierarchy for avifind.

All exceptions inherit from AvifindError for unified error handling.
Specific exceptions provide detailed context for debugging.
"""

from __future__ import annotations

from typing import Any


class AvifindError(Exception):
    """
    Base exception for all avifind errors.

    All custom exceptions inherit from this class, allowing callers
    to catch all avifind errors with a single except clause.

    Attributes:
        message: Human-readable error description
        context: Optional dictionary with additional error context
    """

    def __init__(self, message: str, context: dict[str, Any] | None = None):
        self.message = message
        self.context = context or {}
        super().__init__(self.message)

    def __str__(self) -> str:
        if self.context:
            ctx_str = ", ".join(f"{k}={v!r}" for k, v in self.context.items())
            return f"{self.message} ({ctx_str})"
        return self.message


# =============================================================================
# Configuration Errors
# =============================================================================


class ConfigurationError(AvifindError):
    """
    Error in configuration parsing or validation.

    Raised when:
    - The config file is malformed or names unknown keys
    - Field values fail validation
    """

    pass


class ConfigFileNotFoundError(ConfigurationError):
    """Configuration file does not exist."""

    def __init__(self, path: str):
        super().__init__(f"Configuration file not found: {path}", context={"path": path})


class ConfigValidationError(ConfigurationError):
    """
    Configuration validation failed.

    Attributes:
        field: The field that failed validation
        value: The invalid value
        reason: Why validation failed
    """

    def __init__(self, field: str, value: Any, reason: str):
        super().__init__(
            f"Validation failed for '{field}': {reason}",
            context={"field": field, "value": value, "reason": reason},
        )
        self.field = field
        self.value = value
        self.reason = reason


# =============================================================================
# Image Errors
# =============================================================================


class ImageError(AvifindError):
    """Base class for image decoding and geometry errors."""

    pass


class ImageReadError(ImageError):
    """Image file could not be opened."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"Cannot read image {path}: {reason}", context={"path": path})
        self.path = path
        self.reason = reason


class UnsupportedImageError(ImageError):
    """File is not in a raster format the decoder understands."""

    def __init__(self, path: str):
        super().__init__(f"Unsupported image format: {path}", context={"path": path})
        self.path = path


class CorruptImageError(ImageError):
    """File has a known format but its payload cannot be decoded."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"Corrupt image data in {path}: {reason}", context={"path": path})
        self.path = path
        self.reason = reason


class ImageTooSmallError(ImageError):
    """Image is smaller than an operation's support."""

    def __init__(self, shape: tuple[int, ...], minimum: int, operation: str):
        super().__init__(
            f"Image too small for {operation}: need at least {minimum} px per side",
            context={"shape": shape, "minimum": minimum},
        )
        self.shape = shape
        self.minimum = minimum
        self.operation = operation


# =============================================================================
# Contour and Descriptor Errors
# =============================================================================


class ContourError(AvifindError):
    """Base class for contour extraction errors."""

    pass


class EmptyContourError(ContourError):
    """The edge map holds too few pixels to form a contour."""

    def __init__(self, source_id: str, edge_pixels: int = 0):
        super().__init__(
            f"No contour found for image '{source_id}'",
            context={"source_id": source_id, "edge_pixels": edge_pixels},
        )
        self.source_id = source_id
        self.edge_pixels = edge_pixels


class DescriptorError(AvifindError):
    """Base class for descriptor computation errors."""

    pass


class DimensionMismatchError(DescriptorError):
    """Vector dimension does not match what the consumer expects."""

    def __init__(self, expected: int, actual: int, what: str = "descriptor"):
        super().__init__(
            f"Dimension mismatch for {what}: expected {expected}, got {actual}",
            context={"expected": expected, "actual": actual},
        )
        self.expected = expected
        self.actual = actual


class HistogramConservationError(DescriptorError):
    """Binned, outside and at-reference counts do not add up to the contour size."""

    def __init__(self, binned: int, outside: int, at_ref: int, offered: int):
        super().__init__(
            "Shape-context counts do not account for every contour point",
            context={"binned": binned, "outside": outside, "at_ref": at_ref, "offered": offered},
        )


# =============================================================================
# Vocabulary Errors
# =============================================================================


class VocabularyError(AvifindError):
    """Base class for vocabulary training errors."""

    pass


class InsufficientDescriptorsError(VocabularyError):
    """Fewer distinct descriptors than requested visual words."""

    def __init__(self, k: int, distinct: int):
        super().__init__(
            f"Cannot train {k} visual words from {distinct} distinct descriptors",
            context={"k": k, "distinct": distinct},
        )
        self.k = k
        self.distinct = distinct


# =============================================================================
# File Format Errors
# =============================================================================


class FileFormatError(AvifindError):
    """Base class for vocabulary/index/report file errors."""

    pass


class FormatVersionError(FileFormatError):
    """File header names an unknown magic token or version."""

    def __init__(self, path: str, found: str, expected: str):
        super().__init__(
            f"Unsupported file header in {path}: '{found}' (expected '{expected}')",
            context={"path": path},
        )
        self.path = path
        self.found = found
        self.expected = expected


class MalformedRecordError(FileFormatError):
    """A record line cannot be parsed."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(
            f"Malformed record at {path}:{line_no}: {reason}",
            context={"path": path, "line": line_no},
        )
        self.path = path
        self.line_no = line_no
        self.reason = reason


class FingerprintMismatchError(FileFormatError):
    """Index was built against a different vocabulary file."""

    def __init__(self, expected: str, found: str):
        super().__init__(
            "Index was built with a different vocabulary",
            context={"expected": expected[:12], "found": found[:12]},
        )
        self.expected = expected
        self.found = found


# =============================================================================
# Retrieval Errors
# =============================================================================


class RetrievalError(AvifindError):
    """Base class for index and query errors."""

    pass


class DuplicateImageIdError(RetrievalError):
    """Two entries share one image id."""

    def __init__(self, image_id: str):
        super().__init__(f"Duplicate image id: {image_id}", context={"image_id": image_id})
        self.image_id = image_id


class EmptyIndexError(RetrievalError):
    """Query issued against an index without entries."""

    def __init__(self) -> None:
        super().__init__("Index has no entries")


# =============================================================================
# Corpus Errors
# =============================================================================


class CorpusError(AvifindError):
    """Base class for dataset ingestion errors."""

    pass


class CorpusNotFoundError(CorpusError):
    """Corpus root does not exist."""

    def __init__(self, path: str):
        super().__init__(f"Corpus root not found: {path}", context={"path": path})
        self.path = path


class NoClassesFoundError(CorpusError):
    """Corpus root holds no class with images."""

    def __init__(self, path: str):
        super().__init__(f"No image classes found under {path}", context={"path": path})
        self.path = path


# =============================================================================
# Evaluation Errors
# =============================================================================


class EvaluationError(AvifindError):
    """Evaluation inputs are unusable (bad cutoffs, too few classes, ...)."""

    pass
