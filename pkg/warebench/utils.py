from __future__ import annotations

import math

MEGABYTE = 1024**2


def round_half_up(value: float) -> int:
    """
    >>> round_half_up(2.5), round_half_up(2.49), round_half_up(-0.5), round_half_up(-0.51)
    (3, 2, 0, -1)
    """
    return math.floor(value + 0.5)


def clamp(value: float, low: float, high: float = math.inf) -> float:
    """
    >>> clamp(-3, 1), clamp(0.5, 0.01, 1), clamp(7, 1, 5)
    (1, 0.5, 5)
    """
    return max(low, min(value, high))


def to_megabytes(size_bytes: float) -> float:
    """
    >>> to_megabytes(3 * 1024**2)
    3.0
    """
    return size_bytes / MEGABYTE
