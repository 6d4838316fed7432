from __future__ import annotations

import csv

import numpy as np
import pytest

from warebench.backend import IN_MEMORY, Backend, BackendConfig
from warebench.datagen import (
    BatchWriter,
    draw_measures,
    export_csv,
    fact_candidate_count,
    generate_fact,
    load_warehouse,
)
from warebench.errors import ConfigTooLargeError, LoadError
from warebench.params import LowLevelParams
from warebench.randomizer import SeededRng
from warebench.schema import build_schema, emit_ddl
from warebench.testing import build_tiny_warehouse


def two_dimension_schema(density: float):
    low = LowLevelParams(
        nb_ft=1,
        tot_nb_dim=2,
        nb_dim=[2],
        nb_meas=[1],
        density=[density],
        nb_levels=[1, 1],
        nb_att=[[1], [1]],
        hhlevel_size=[4, 4],
        dim_sfactor=[1, 1],
    )
    return build_schema(low, SeededRng(0))


def fact_rows(schema, seed: int) -> list[tuple]:
    rows = []
    generate_fact(schema.fact_tables[0], schema, SeededRng(seed), lambda batch: rows.extend(batch.rows))
    return rows


def test_density_law():
    schema = two_dimension_schema(0.6)
    assert fact_candidate_count(schema.fact_tables[0], schema) == 16
    sizes = [len(fact_rows(schema, seed)) for seed in range(200)]
    assert np.mean(sizes) == pytest.approx(9.6, abs=0.5)
    assert all(0 <= size <= 16 for size in sizes)


def test_full_density():
    rows = fact_rows(two_dimension_schema(1), 3)
    assert sorted(row[:2] for row in rows) == [(i, j) for i in range(1, 5) for j in range(1, 5)]


def test_batch_writer():
    batches = []
    with BatchWriter("DIM1_1", ("A",), batches.append, 3) as writer:
        writer.write([(value,) for value in range(5)])
        writer.write([(5,), (6,)])
    assert [len(batch.rows) for batch in batches] == [3, 3, 1]
    assert [batch.ordinal for batch in batches] == [0, 1, 2]
    assert writer.row_count == 7


def test_draw_measures():
    values = draw_measures(SeededRng(4), 1000, 3)
    assert values.shape == (1000, 3)
    assert values.dtype == np.float32
    assert values.min() >= 0
    assert values.max() < 100


def test_load_tiny_warehouse(loaded_backend, tiny_warehouse):
    schema = tiny_warehouse.schema
    for level in schema.iter_levels():
        assert loaded_backend.count(level.table_name) == level.target_cardinality
        assert loaded_backend.max_key(level.table_name, level.primary_key) == level.target_cardinality
        if level.foreign_key is not None:
            coarser = schema.dimension(level.dimension).coarser_link(level)
            orphans = loaded_backend.scalar(
                f"SELECT COUNT(*) FROM {level.table_name} WHERE {level.foreign_key} NOT BETWEEN 1 AND "
                f"{coarser.target_cardinality}",
            )
            assert orphans == 0
    fact = schema.fact_tables[0]
    keys = ", ".join(fact.key_attrs)
    distinct = loaded_backend.scalar(f"SELECT COUNT(*) FROM (SELECT DISTINCT {keys} FROM {fact.table_name}) t")
    assert distinct == loaded_backend.count(fact.table_name)


def test_load_is_independent_of_batch_size():
    warehouse = build_tiny_warehouse()
    digests = []
    for batch_size in (1, 7, 1000):
        with Backend(BackendConfig(IN_MEMORY)) as backend:
            backend.execute_ddl(emit_ddl(warehouse.schema, backend.dialect))
            load_warehouse(warehouse.schema, warehouse.rng, backend, batch_size=batch_size)
            digests.append([backend.table_digest(table) for table in warehouse.schema.table_names])
    assert digests[0] == digests[1] == digests[2]


def test_too_large(sqlite_backend, tiny_warehouse):
    sqlite_backend.execute_ddl(emit_ddl(tiny_warehouse.schema, sqlite_backend.dialect))
    with pytest.raises(ConfigTooLargeError, match="FT1"):
        load_warehouse(tiny_warehouse.schema, tiny_warehouse.rng, sqlite_backend, max_candidates=10)
    assert sqlite_backend.count("DIM1_1") == 0


def test_load_failure_names_last_table(sqlite_backend, tiny_warehouse):
    schema = tiny_warehouse.schema
    statements = emit_ddl(schema, sqlite_backend.dialect)
    # Only the first dimension exists
    sqlite_backend.execute_ddl(statements[:2])
    with pytest.raises(LoadError) as exc_info:
        load_warehouse(schema, tiny_warehouse.rng, sqlite_backend)
    assert exc_info.value.last_completed_table == "DIM1_1"


def test_export_matches_load(tmp_path, loaded_backend, tiny_warehouse):
    schema = tiny_warehouse.schema
    paths = export_csv(schema, tiny_warehouse.rng, tmp_path)
    assert list(paths) == list(schema.table_names)
    for table, path in paths.items():
        with path.open(newline="") as f:
            reader = csv.reader(f)
            assert tuple(next(reader)) == schema.table_attributes(table)
            exported = list(reader)
        loaded = loaded_backend.dump_table(table)
        types = [type(value) for value in loaded[0]]
        converted = sorted(tuple(kind(text) for kind, text in zip(types, row, strict=True)) for row in exported)
        assert converted == loaded
