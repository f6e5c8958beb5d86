"""Round-trip-exact number formatting shared by the CSV writers."""

from __future__ import annotations


def g17(value: float) -> str:
    """Format a float with 17 significant digits (exact double round trip)."""
    return format(float(value), ".17g")
