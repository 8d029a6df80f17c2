"""
Utility functions for avifind.

Provides identifier sanitization and value conversion helpers.
"""

from __future__ import annotations

from avifind.utils.conversion import (
    format_decimal,
    parse_float_field,
    parse_int_list,
    parse_name_list,
)
from avifind.utils.sanitize import (
    make_image_id,
    split_flat_name,
    validate_image_id,
)

__all__ = [
    # Conversion
    "format_decimal",
    # Sanitization
    "make_image_id",
    "parse_float_field",
    "parse_int_list",
    "parse_name_list",
    "split_flat_name",
    "validate_image_id",
]
