"""
String sanitization utilities for image identifiers.

Image ids and labels are written as TAB-separated fields of the index
file and the query output, so they may not contain TAB or newlines.
"""

from __future__ import annotations

import re

_FORBIDDEN = re.compile(r"[\t\r\n]")
FLAT_SEPARATOR = "__"


def validate_image_id(value: str) -> str:
    """
    Check that an id or label can be stored as one TSV field.

    Args:
        value: Candidate id

    Returns:
        The value unchanged

    Raises:
        ValueError: If the value is empty or holds TAB/newline characters

    Example:
        >>> validate_image_id("001.Black_footed_Albatross/img_01.jpg")
        '001.Black_footed_Albatross/img_01.jpg'
    """
    if not value:
        raise ValueError("identifier must not be empty")
    if _FORBIDDEN.search(value):
        raise ValueError(f"identifier {value!r} contains TAB or newline")
    return value


def make_image_id(label: str, filename: str) -> str:
    """
    Build the canonical `<class>/<filename>` image id.

    Example:
        >>> make_image_id("cardinal", "c1.png")
        'cardinal/c1.png'
    """
    return validate_image_id(f"{label}/{filename}")


def split_flat_name(filename: str) -> tuple[str, str] | None:
    """
    Split a flat `<class>__<file>` name into its parts.

    Returns:
        (label, file) or None when the name carries no class prefix

    Example:
        >>> split_flat_name("cardinal__c1.png")
        ('cardinal', 'c1.png')
        >>> split_flat_name("c1.png") is None
        True
    """
    label, sep, rest = filename.partition(FLAT_SEPARATOR)
    if not sep or not label or not rest:
        return None
    return label, rest
