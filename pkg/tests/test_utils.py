from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from warebench.utils import clamp, round_half_up, to_megabytes


@pytest.mark.parametrize(("value", "expected"), [(0.5, 1), (1.49, 1), (1.5, 2), (-1.5, -1), (10, 10)])
def test_round_half_up(value, expected):
    assert round_half_up(value) == expected


@given(st.floats(allow_nan=False, allow_infinity=False), st.floats(-100, 100), st.floats(100, 1000))
def test_clamp_within_bounds(value, low, high):
    assert low <= clamp(value, low, high) <= high


def test_to_megabytes():
    assert to_megabytes(0) == 0
    assert to_megabytes(512 * 1024) == 0.5
