from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from warebench.hashing import INT64_MAX, derive_seed, digest_rows, stable_hash

primitives = st.one_of(st.none(), st.booleans(), st.integers(), st.text(), st.binary())


@given(st.lists(primitives))
def test_stable_hash_range(values):
    assert 0 <= stable_hash(*values) <= INT64_MAX


@given(st.lists(primitives))
def test_stable_hash_repeatable(values):
    assert stable_hash(*values) == stable_hash(*list(values))


def test_stable_hash_distinguishes_inputs():
    assert stable_hash(1, "schema") == stable_hash(1, "schema")
    assert stable_hash(1, "schema") != stable_hash(1, "workload")
    assert stable_hash("1") != stable_hash(1)
    assert stable_hash({"b": 1, "a": 2}) == stable_hash({"a": 2, "b": 1})


def test_stable_hash_rejects_objects():
    with pytest.raises(TypeError, match="Can't hash"):
        stable_hash(object())


def test_derive_seed_depends_on_both_inputs():
    assert derive_seed(1, "data:DIM1_1") != derive_seed(2, "data:DIM1_1")
    assert derive_seed(1, "data:DIM1_1") != derive_seed(1, "data:DIM1_2")


def test_digest_rows():
    rows = [(1, "DIM1_1_DESCR1_AAAA"), (2, "DIM1_1_DESCR1_BBBB")]
    assert digest_rows(rows) == digest_rows([list(row) for row in rows])
    assert digest_rows(rows) != digest_rows(rows[::-1])
    assert digest_rows(rows) != digest_rows([(1, "DIM1_1_DESCR1_AAAA"), (2, "DIM1_1_DESCR1_BBBC")])
    assert len(digest_rows([])) == 32
