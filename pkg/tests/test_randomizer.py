from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from warebench.errors import DimensionExhaustedError, EmptyTableError, InvalidRangeError
from warebench.randomizer import REFERENTIAL_SIZE, STRING_LENGTH, SeededRng, StringReferential


def test_same_seed_same_stream():
    first, second = SeededRng(7), SeededRng(7)
    assert [first.random_key(100) for _ in range(50)] == [second.random_key(100) for _ in range(50)]
    assert first.random_strings("A", 10) == second.random_strings("A", 10)


def test_spawn_is_independent_of_parent_consumption():
    rng = SeededRng(3)
    untouched = rng.spawn("data:DIM1_1").uniform_floats(0, 1, 5)
    rng.uniform_float(0, 1)
    rng.random_key(10)
    assert np.array_equal(rng.spawn("data:DIM1_1").uniform_floats(0, 1, 5), untouched)
    assert not np.array_equal(rng.spawn("data:DIM1_2").uniform_floats(0, 1, 5), untouched)


def test_spawn_shares_referential():
    rng = SeededRng(3)
    assert rng.spawn("workload").referential is rng.referential
    assert rng.spawn("a").spawn("b").referential is rng.referential


def test_referential():
    referential = SeededRng(11).referential
    assert referential.pool_size == len(referential) == REFERENTIAL_SIZE
    assert len(set(referential.pool)) == REFERENTIAL_SIZE
    assert all(len(entry) == STRING_LENGTH for entry in referential.pool)
    assert referential.pool == SeededRng(11).referential.pool


@pytest.mark.parametrize(
    ("pool", "match"),
    [([], "empty"), (["SHORT"], "characters"), (["A" * STRING_LENGTH] * 2, "distinct")],
)
def test_referential_rejects_bad_pool(pool, match):
    with pytest.raises(ValueError, match=match):
        StringReferential(pool)


@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=10_000))
def test_random_key_in_range(seed, extension_size):
    rng = SeededRng(seed)
    assert 1 <= rng.random_key(extension_size) <= extension_size
    keys = rng.random_keys(extension_size, 20)
    assert keys.min() >= 1
    assert keys.max() <= extension_size


def test_random_key_empty_table():
    with pytest.raises(EmptyTableError):
        SeededRng(1).random_key(0)
    with pytest.raises(EmptyTableError):
        SeededRng(1).random_keys(0, 3)


def test_random_key_is_skewed_to_the_middle():
    keys = SeededRng(5).random_keys(1000, 20_000)
    middle = np.mean((keys > 333) & (keys <= 666))
    assert middle > 0.6


def test_single_key_table():
    rng = SeededRng(1)
    assert {rng.random_key(1) for _ in range(20)} == {1}


@given(st.floats(min_value=-1e6, max_value=1e6), st.floats(min_value=0, max_value=1e6))
def test_uniform_float_in_range(low, width):
    value = SeededRng(1).uniform_float(low, low + width)
    assert low <= value <= low + width


def test_uniform_invalid_range():
    rng = SeededRng(1)
    with pytest.raises(InvalidRangeError):
        rng.uniform_float(2, 1)
    with pytest.raises(InvalidRangeError):
        rng.uniform_int(5, 4)
    assert rng.uniform_float(3, 3) == 3
    assert rng.uniform_int(4, 4) == 4


@pytest.mark.parametrize("probability", [0, 1])
def test_bernoulli_extremes(probability):
    rng = SeededRng(2)
    assert {rng.bernoulli(probability) for _ in range(200)} == {bool(probability)}


def test_gauss_int_without_spread():
    rng = SeededRng(1, sigma_ratio=0)
    assert rng.gauss_int(4.5) == 5
    assert rng.gauss_int(0.2) == 1
    assert rng.gauss_int(10, high=6) == 6


@given(st.integers(min_value=0, max_value=2**32), st.floats(min_value=0.01, max_value=1))
def test_gauss_real_clamped(seed, avg):
    rng = SeededRng(seed, sigma_ratio=2)
    assert 0.01 <= rng.gauss_real(avg, 0.01, 1) <= 1


def test_gauss_int_mean():
    rng = SeededRng(9)
    values = [rng.gauss_int(5) for _ in range(5000)]
    assert abs(np.mean(values) - 5) < 0.1
    assert min(values) >= 1


def test_negative_sigma_ratio():
    with pytest.raises(InvalidRangeError):
        SeededRng(1, sigma_ratio=-0.1)


def test_random_dimension():
    rng = SeededRng(4)
    assert rng.random_dimension([1, 2, 3], attached={1, 3}) == 2
    with pytest.raises(DimensionExhaustedError):
        rng.random_dimension([1, 2], attached=[1, 2])


def test_skewed_pick_empty():
    with pytest.raises(EmptyTableError):
        SeededRng(1).random_attribute([])


def test_random_string_format():
    rng = SeededRng(8)
    value = rng.random_string("DIM1_1_DESCR1")
    prefix, entry = value.rsplit("_", 1)
    assert prefix == "DIM1_1_DESCR1"
    assert entry in rng.referential.pool
    assert all(item.startswith("FT1_X_") for item in rng.random_strings("FT1_X", 5))


def test_uniform_float_mean():
    rng = SeededRng(12)
    draws = [rng.uniform_float(0, 1) for _ in range(100_000)]
    assert np.mean(draws) == pytest.approx(0.5, abs=0.005)
    assert np.mean(rng.uniform_floats(10, 20, 100_000)) == pytest.approx(15, abs=0.05)


def test_random_string_is_skewed():
    rng = SeededRng(13)
    referential = rng.referential
    positions = {entry: index for index, entry in enumerate(referential.pool)}
    draws = 20_000
    observed = np.zeros(referential.pool_size)
    for value in rng.random_strings("DIM1_1_DESCR1", draws):
        observed[positions[value.rsplit("_", 1)[1]]] += 1
    expected = draws / referential.pool_size
    chi_square = np.sum((observed - expected) ** 2 / expected)
    # Uniform draws stay below ~1143 (999 degrees of freedom, p = 0.001)
    assert chi_square > 10 * 1143
    middle = observed[333:667].sum() / draws
    assert middle > 0.6


def test_random_dimension_histogram():
    rng = SeededRng(14)
    dimensions = list(range(1, 10))
    draws = 20_000
    counts = np.bincount([rng.random_dimension(dimensions) for _ in range(draws)], minlength=10)[1:] / draws
    assert int(np.argmax(counts)) + 1 in (4, 5)
    assert counts[3:6].sum() == pytest.approx(0.656, abs=0.02)
    assert counts[0] < 0.03
    assert counts[-1] < 0.01
    attached = {4, 5}
    assert not {rng.random_dimension(dimensions, attached) for _ in range(200)} & attached
