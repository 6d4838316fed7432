from __future__ import annotations

import dataclasses

import pytest

from warebench.dialect import get_dialect
from warebench.errors import ParameterError
from warebench.params import HighLevelParams, LowLevelParams, derive_low_level
from warebench.randomizer import SeededRng
from warebench.schema import build_schema, emit_ddl, write_ddl

ANSI = get_dialect("ansi")


def default_low() -> LowLevelParams:
    return derive_low_level(HighLevelParams(sigma_ratio=0), SeededRng(1, sigma_ratio=0))


def star_low(tot_nb_dim: int = 3) -> LowLevelParams:
    return LowLevelParams(
        nb_ft=1,
        tot_nb_dim=tot_nb_dim,
        nb_dim=[tot_nb_dim],
        nb_meas=[2],
        density=[0.5],
        nb_levels=[1] * tot_nb_dim,
        nb_att=[[2]] * tot_nb_dim,
        hhlevel_size=[5] * tot_nb_dim,
        dim_sfactor=[1] * tot_nb_dim,
    )


def test_default_schema_shape():
    schema = build_schema(default_low(), SeededRng(1))
    assert len(schema.fact_tables) == 1
    fact = schema.fact_tables[0]
    assert sorted(fact.dim_refs) == [1, 2, 3, 4, 5]
    assert len(fact.key_attrs) == 5
    assert fact.measures == tuple(f"FT1_MEAS{k}" for k in range(1, 6))
    assert fact.density == 0.6
    assert len(schema.dimensions) == 5
    for dimension in schema.dimensions:
        assert [level.target_cardinality for level in dimension.levels] == [1000, 100, 10]
        assert all(len(level.members) == 5 for level in dimension.levels)


def test_level_attributes():
    schema = build_schema(default_low(), SeededRng(1))
    dimension = schema.dimension(2)
    finest, coarsest = dimension.finest, dimension.coarsest
    assert finest.attributes == ("DIM2_1_PK", *(f"DIM2_1_DESCR{k}" for k in range(1, 6)), "DIM2_1_FK")
    assert coarsest.foreign_key is None
    assert dimension.coarser_link(finest) is dimension.level(2)
    assert dimension.finer_link(dimension.level(2)) is finest
    assert dimension.coarser_link(coarsest) is None
    assert dimension.finer_link(finest) is None
    with pytest.raises(IndexError):
        dimension.level(4)


def test_fact_key_names():
    schema = build_schema(default_low(), SeededRng(1))
    fact = schema.fact_tables[0]
    for dim, key in zip(fact.dim_refs, fact.key_attrs, strict=True):
        assert key == f"FT1_DIM{dim}_1_FK"
        assert fact.key_attr_for(dim) == key


def test_attribute_names_are_unique():
    schema = build_schema(default_low(), SeededRng(1))
    names = [name for table in schema.table_names for name in schema.table_attributes(table)]
    assert len(names) == len(set(names))


def test_star_schema():
    schema = build_schema(star_low(), SeededRng(1))
    assert all(level.foreign_key is None for level in schema.iter_levels())
    assert len(emit_ddl(schema, ANSI)) == 3 + 1


def test_fully_shared_dimensions():
    low = LowLevelParams(
        nb_ft=2,
        tot_nb_dim=3,
        nb_dim=[3, 3],
        nb_meas=[1, 1],
        density=[1, 1],
        nb_levels=[1, 1, 1],
        nb_att=[[1], [1], [1]],
        hhlevel_size=[2, 2, 2],
        dim_sfactor=[1, 1, 1],
    )
    schema = build_schema(low, SeededRng(5))
    assert [sorted(fact.dim_refs) for fact in schema.fact_tables] == [[1, 2, 3], [1, 2, 3]]


def test_invalid_low_level_rejected():
    bad = dataclasses.replace(star_low(), density=(1.5,))
    with pytest.raises(ParameterError, match="density"):
        build_schema(bad, SeededRng(1))


def test_default_ddl():
    schema = build_schema(default_low(), SeededRng(1))
    statements = emit_ddl(schema, ANSI)
    assert len(statements) == 16
    assert statements[0].startswith("CREATE TABLE DIM1_3 (DIM1_3_PK INTEGER NOT NULL, DIM1_3_DESCR1 CHAR(34) NOT NULL")
    assert statements[1].startswith("CREATE TABLE DIM1_2 ")
    assert "FOREIGN KEY (DIM1_2_FK) REFERENCES DIM1_3 (DIM1_3_PK)" in statements[1]
    assert statements[-1].startswith("CREATE TABLE FT1 (")
    assert "PRIMARY KEY (" in statements[-1]
    assert "FT1_MEAS1 REAL NOT NULL" in statements[-1]


def test_ddl_without_constraints():
    schema = build_schema(default_low(), SeededRng(1))
    statements = emit_ddl(schema, ANSI, constraints=False)
    assert not any("PRIMARY KEY" in statement or "FOREIGN KEY" in statement for statement in statements)


def test_ddl_is_deterministic(tmp_path):
    first = emit_ddl(build_schema(default_low(), SeededRng(9)), ANSI)
    second = emit_ddl(build_schema(default_low(), SeededRng(9)), ANSI)
    write_ddl(first, tmp_path / "first.sql")
    write_ddl(second, tmp_path / "second.sql")
    assert (tmp_path / "first.sql").read_bytes() == (tmp_path / "second.sql").read_bytes()
    lines = (tmp_path / "first.sql").read_text().splitlines()
    assert len(lines) == 16
    assert all(line.endswith(";") for line in lines)


def test_ddl_runs_on_sqlite(sqlite_backend):
    schema = build_schema(default_low(), SeededRng(1))
    assert sqlite_backend.execute_ddl(emit_ddl(schema, sqlite_backend.dialect)) == 16
    assert sorted(sqlite_backend.existing_tables()) == sorted(schema.table_names)
