"""
Value conversion utilities.

Provides the fixed-precision number formatting shared by every text
artifact, and parsing of comma-separated CLI lists.
"""

from __future__ import annotations

import math

from avifind.constants import FileFormats


def format_decimal(value: float, digits: int = FileFormats.SIGNIFICANT_DIGITS) -> str:
    """
    Format a float with a fixed number of significant digits.

    Negative zero is written as 0 so that equal values serialize equally.

    Example:
        >>> format_decimal(1 / 3)
        '0.333333333'
        >>> format_decimal(-0.0)
        '0'
    """
    if value == 0.0:
        return "0"
    return f"{value:.{digits}g}"


def parse_float_field(token: str) -> float:
    """
    Parse one serialized number, rejecting NaN and infinities.

    Raises:
        ValueError: For unparsable or non-finite tokens
    """
    value = float(token)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {token!r}")
    return value


def parse_int_list(value: str) -> list[int]:
    """
    Parse a comma-separated list of integers.

    Example:
        >>> parse_int_list("200, 300,400")
        [200, 300, 400]
    """
    items = [part.strip() for part in value.split(",") if part.strip()]
    if not items:
        raise ValueError("expected at least one integer")
    return [int(part) for part in items]


def parse_name_list(value: str) -> list[str]:
    """
    Parse a comma-separated list of names, dropping blanks and duplicates.

    Example:
        >>> parse_name_list("fused, shape,fused")
        ['fused', 'shape']
    """
    names: list[str] = []
    for part in value.split(","):
        name = part.strip()
        if name and name not in names:
            names.append(name)
    if not names:
        raise ValueError("expected at least one name")
    return names
