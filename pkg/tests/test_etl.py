from __future__ import annotations

import logging

import numpy as np
import pytest

from warebench.backend import IN_MEMORY, Backend, BackendConfig
from warebench.datagen import load_warehouse
from warebench.errors import FactTableSaturatedError, PreconditionError, StaleKeyError
from warebench.etl import WarehouseRefresher, execute_refresh, plan_refresh, realize
from warebench.model import WarehouseStats
from warebench.params import EtlParams, LowLevelParams
from warebench.randomizer import SeededRng
from warebench.schema import build_schema, emit_ddl

TEN_THOUSAND = WarehouseStats({"FT1": 10000})


def test_realize():
    rng = SeededRng(2)
    assert {realize(2.0, rng) for _ in range(20)} == {2}
    draws = [realize(0.25, rng) for _ in range(4000)]
    assert set(draws) == {0, 1}
    assert np.mean(draws) == pytest.approx(0.25, abs=0.03)


def test_quotas(tiny_warehouse):
    rng = SeededRng(3)
    plans = [plan_refresh(EtlParams(), TEN_THOUSAND, tiny_warehouse.schema, rng) for _ in range(200)]
    assert np.mean([plan.dimension_operations for plan in plans]) == pytest.approx(5.0, abs=0.3)
    assert np.mean([plan.fact_operations for plan in plans]) == pytest.approx(95.0, abs=3)
    plan = plans[0]
    assert [quota.table_name for quota in plan.levels] == ["DIM1_2", "DIM1_1", "DIM2_2", "DIM2_1"]
    level_quota = plan.levels[0]
    assert level_quota.insert_quota == pytest.approx(10000 * 0.01 * 0.05 / 2 / 2 * 0.95)
    assert level_quota.modify_quota == pytest.approx(10000 * 0.01 * 0.05 / 2 / 2 * 0.05)
    fact_quota = plan.facts[0]
    assert fact_quota.insert_quota == pytest.approx(95 * 0.95)
    assert fact_quota.inserts in (90, 91)


def test_no_refresh(tiny_warehouse):
    plan = plan_refresh(EtlParams(grr=0), TEN_THOUSAND, tiny_warehouse.schema, SeededRng(1))
    assert plan.is_empty


def test_empty_warehouse(tiny_warehouse):
    with pytest.raises(PreconditionError):
        plan_refresh(EtlParams(), WarehouseStats(), tiny_warehouse.schema, SeededRng(1))


def test_insert_into_dimensions(loaded_backend, tiny_warehouse):
    schema = tiny_warehouse.schema
    refresher = WarehouseRefresher(schema, loaded_backend, SeededRng(5))
    finest, coarsest = schema.dimension(1).finest, schema.dimension(1).coarsest
    assert refresher.insert_into_dim(finest) == 13
    assert refresher.insert_into_dim(coarsest) == 5
    for _ in range(30):
        refresher.insert_into_dim(finest)
    assert loaded_backend.count(finest.table_name) == 43
    assert loaded_backend.max_key(finest.table_name, finest.primary_key) == 43
    links = loaded_backend.fetch_all(f"SELECT DISTINCT {finest.foreign_key} FROM {finest.table_name}")
    assert {key for (key,) in links} <= set(range(1, 6))


def test_max_key_read_once_per_phase(loaded_backend, tiny_warehouse, monkeypatch):
    calls = []
    max_key = loaded_backend.max_key

    def counting_max_key(table, column):
        calls.append(table)
        return max_key(table, column)

    monkeypatch.setattr(loaded_backend, "max_key", counting_max_key)
    finest = tiny_warehouse.schema.dimension(1).finest
    refresher = WarehouseRefresher(tiny_warehouse.schema, loaded_backend, SeededRng(5))
    assert [refresher.insert_into_dim(finest) for _ in range(5)] == [13, 14, 15, 16, 17]
    assert calls == [finest.table_name]
    next_phase = WarehouseRefresher(tiny_warehouse.schema, loaded_backend, SeededRng(5))
    assert next_phase.insert_into_dim(finest) == 18
    assert calls == [finest.table_name, finest.table_name]


def test_insert_into_fact(loaded_backend, tiny_warehouse):
    fact = tiny_warehouse.schema.fact_tables[0]
    before = loaded_backend.count(fact.table_name)
    refresher = WarehouseRefresher(tiny_warehouse.schema, loaded_backend, SeededRng(6))
    keys = [refresher.insert_into_ft(fact) for _ in range(10)]
    assert len(set(keys)) == 10
    assert loaded_backend.count(fact.table_name) == before + 10


def test_fact_table_saturation():
    low = LowLevelParams(
        nb_ft=1,
        tot_nb_dim=2,
        nb_dim=[2],
        nb_meas=[1],
        density=[1],
        nb_levels=[1, 1],
        nb_att=[[1], [1]],
        hhlevel_size=[3, 3],
        dim_sfactor=[1, 1],
    )
    rng = SeededRng(1)
    schema = build_schema(low, rng.spawn("schema"))
    with Backend(BackendConfig(IN_MEMORY)) as backend:
        backend.execute_ddl(emit_ddl(schema, backend.dialect))
        load_warehouse(schema, rng, backend)
        assert backend.count("FT1") == 9
        with pytest.raises(FactTableSaturatedError):
            WarehouseRefresher(schema, backend, SeededRng(2)).insert_into_ft(schema.fact_tables[0])


def test_modify_dim(loaded_backend, tiny_warehouse):
    level = tiny_warehouse.schema.dimension(2).finest
    refresher = WarehouseRefresher(tiny_warehouse.schema, loaded_backend, SeededRng(7))
    before = loaded_backend.fetch_all(f"SELECT * FROM {level.table_name} WHERE {level.primary_key} = 3")
    members = refresher.modify_dim(level, 3)
    after = loaded_backend.fetch_all(f"SELECT * FROM {level.table_name} WHERE {level.primary_key} = 3")
    assert after[0][0] == before[0][0]
    assert after[0][-1] == before[0][-1]
    assert list(after[0][1:-1]) == list(members.values())
    with pytest.raises(StaleKeyError):
        refresher.modify_dim(level, 999)


def test_modify_fact(loaded_backend, tiny_warehouse):
    fact = tiny_warehouse.schema.fact_tables[0]
    refresher = WarehouseRefresher(tiny_warehouse.schema, loaded_backend, SeededRng(8))
    key = refresher.random_fact_key(fact)
    measures = refresher.modify_ft(fact, key)
    condition = " AND ".join(f"{name} = {value}" for name, value in zip(fact.key_attrs, key, strict=True))
    row = loaded_backend.fetch_all(f"SELECT {', '.join(fact.measures)} FROM {fact.table_name} WHERE {condition}")
    assert list(row[0]) == pytest.approx(measures)
    with pytest.raises(StaleKeyError):
        refresher.modify_ft(fact, (999, 999))


def test_stale_key_is_redrawn(loaded_backend, tiny_warehouse, caplog):
    level = tiny_warehouse.schema.dimension(1).finest
    refresher = WarehouseRefresher(tiny_warehouse.schema, loaded_backend, SeededRng(9))
    keys = iter([999, 4])
    modified = []

    def modify(key):
        modified.append(key)
        return refresher.modify_dim(level, key)

    with caplog.at_level(logging.WARNING):
        refresher.modify_with_retry(level.table_name, lambda: next(keys), modify)
    assert modified == [999, 4]
    assert "Stale key" in caplog.text

    keys = iter([998, 999])
    with pytest.raises(StaleKeyError):
        refresher.modify_with_retry(level.table_name, lambda: next(keys), modify)


def test_execute_refresh(loaded_backend, tiny_warehouse):
    schema = tiny_warehouse.schema
    before = loaded_backend.warehouse_stats(schema)
    plan = plan_refresh(EtlParams(grr=0.5, drr=0.3, ir=0.8), before, schema, SeededRng(10))
    outcome = execute_refresh(plan, schema, loaded_backend, SeededRng(11))
    after = loaded_backend.warehouse_stats(schema)
    assert outcome.inserts == sum(quota.inserts for quota in (*plan.levels, *plan.facts))
    assert outcome.modifies == sum(quota.modifies for quota in (*plan.levels, *plan.facts))
    assert after.global_size == before.global_size + outcome.inserts
    for quota in (*plan.levels, *plan.facts):
        assert after.count(quota.table_name) == before.count(quota.table_name) + quota.inserts
    assert outcome.duration >= 0
    assert loaded_backend.scalar("PRAGMA foreign_key_check") is None
