"""
Warehouse refresh: insert and modification quotas and the four refresh operations.

Tuples are never deleted, so keys of every table stay the sequential range `1..count`.
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Any, NamedTuple

from warebench.datagen import draw_measures
from warebench.errors import FactTableSaturatedError, PreconditionError, StaleKeyError
from warebench.timing import Timer

if TYPE_CHECKING:
    from collections.abc import Callable

    from warebench.backend import Backend
    from warebench.model import FactTableDef, HierarchyLevelDef, WarehouseSchema, WarehouseStats
    from warebench.params import EtlParams
    from warebench.randomizer import SeededRng

LOGGER = logging.getLogger(__name__)

MAX_INSERT_ATTEMPTS = 100


class TableQuota(NamedTuple):
    """Expected (real) and realized (integer) operation counts for one table"""

    table_name: str
    insert_quota: float
    modify_quota: float
    inserts: int
    modifies: int

    @property
    def operations(self) -> int:
        return self.inserts + self.modifies


class RefreshPlan(NamedTuple):
    # Dimension levels in processing order: dimension by dimension, coarsest level first
    levels: tuple[TableQuota, ...]
    facts: tuple[TableQuota, ...]

    @property
    def dimension_operations(self) -> int:
        return sum(quota.operations for quota in self.levels)

    @property
    def fact_operations(self) -> int:
        return sum(quota.operations for quota in self.facts)

    @property
    def is_empty(self) -> bool:
        return self.dimension_operations + self.fact_operations == 0


class RefreshOutcome(NamedTuple):
    inserts: int = 0
    modifies: int = 0
    duration: float = 0.0

    def __add__(self, other: RefreshOutcome) -> RefreshOutcome:  # type: ignore[override]
        return RefreshOutcome(
            self.inserts + other.inserts,
            self.modifies + other.modifies,
            self.duration + other.duration,
        )


def realize(quota: float, rng: SeededRng) -> int:
    """Integer count whose expectation is `quota`"""
    whole = math.floor(quota)
    return whole + int(rng.bernoulli(quota - whole))


def _table_quota(table_name: str, volume: float, params: EtlParams, rng: SeededRng) -> TableQuota:
    insert_quota = volume * params.ir
    modify_quota = volume * params.mr
    return TableQuota(table_name, insert_quota, modify_quota, realize(insert_quota, rng), realize(modify_quota, rng))


def plan_refresh(params: EtlParams, stats: WarehouseStats, schema: WarehouseSchema, rng: SeededRng) -> RefreshPlan:
    """
    Split `global_size * grr` operations between dimension levels and fact tables.

    Dimensions get the `drr` share, evenly per dimension then per level; fact tables get the `frr` share, evenly.
    """
    if stats.global_size <= 0:
        raise PreconditionError("Can't plan a refresh of an empty warehouse")
    refreshed = stats.global_size * params.grr
    tot_nb_dim = len(schema.dimensions)
    levels = tuple(
        _table_quota(level.table_name, refreshed * params.drr / tot_nb_dim / dimension.nb_levels, params, rng)
        for dimension in schema.dimensions
        for level in reversed(dimension.levels)
    )
    nb_ft = len(schema.fact_tables)
    facts = tuple(
        _table_quota(fact.table_name, refreshed * params.frr / nb_ft, params, rng) for fact in schema.fact_tables
    )
    plan = RefreshPlan(levels, facts)
    LOGGER.debug(
        f"Refresh plan: {plan.dimension_operations} dimension and {plan.fact_operations} fact operations "
        f"for global_size={stats.global_size}",
    )
    return plan


class WarehouseRefresher:
    """
    Issues refresh statements one by one, each in its own transaction.

    Row counts and next keys are cached per instance; create one per refresh phase.
    """

    def __init__(self, schema: WarehouseSchema, backend: Backend, rng: SeededRng) -> None:
        self._schema = schema
        self._backend = backend
        self._rng = rng
        self._counts: dict[str, int] = {}
        self._max_keys: dict[str, int] = {}

    def _count(self, table: str) -> int:
        if table not in self._counts:
            self._counts[table] = self._backend.count(table)
        return self._counts[table]

    def _next_key(self, level: HierarchyLevelDef) -> int:
        if level.table_name not in self._max_keys:
            self._max_keys[level.table_name] = self._backend.max_key(level.table_name, level.primary_key)
        self._max_keys[level.table_name] += 1
        return self._max_keys[level.table_name]

    def _ident(self, name: str) -> str:
        return self._backend.dialect.render_identifier(name)

    def _key_condition(self, columns: tuple[str, ...]) -> str:
        return " AND ".join(f"{self._ident(column)} = :k{index}" for index, column in enumerate(columns))

    def insert_into_dim(self, level: HierarchyLevelDef) -> int:
        """Add one member with the next sequential key; returns the key"""
        key = self._next_key(level)
        values: dict[str, Any] = {level.primary_key: key}
        values.update((member, self._rng.random_string(member)) for member in level.members)
        if level.foreign_key is not None:
            coarser = self._schema.dimension(level.dimension).coarser_link(level)
            values[level.foreign_key] = self._rng.random_key(self._count(coarser.table_name))
        self._insert(level.table_name, values)
        self._counts[level.table_name] = self._count(level.table_name) + 1
        return key

    def insert_into_ft(self, fact: FactTableDef) -> tuple[int, ...]:
        """Add one fact with a composite key not yet present; returns the key"""
        for _ in range(MAX_INSERT_ATTEMPTS):
            key = tuple(
                self._rng.random_key(self._count(self._schema.dimension(dim).finest.table_name))
                for dim in fact.dim_refs
            )
            if not self._fact_exists(fact, key):
                break
        else:
            raise FactTableSaturatedError(
                f"No free key found in {fact.table_name} after {MAX_INSERT_ATTEMPTS} attempts",
            )
        measures = draw_measures(self._rng, 1, len(fact.measures))[0].tolist()
        self._insert(fact.table_name, dict(zip((*fact.key_attrs, *fact.measures), (*key, *measures), strict=True)))
        self._counts[fact.table_name] = self._count(fact.table_name) + 1
        return key

    def modify_dim(self, level: HierarchyLevelDef, key: int) -> dict[str, str]:
        """Rewrite the descriptive members of one row; keys and hierarchy links are left unchanged"""
        members = {member: self._rng.random_string(member) for member in level.members}
        assignments = ", ".join(f"{self._ident(member)} = :{member}" for member in members)
        updated = self._backend.execute(
            f"UPDATE {self._ident(level.table_name)} SET {assignments} "
            f"WHERE {self._key_condition((level.primary_key,))}",
            {**members, "k0": key},
        )
        if not updated:
            raise StaleKeyError(f"{level.table_name} has no key {key}")
        return members

    def modify_ft(self, fact: FactTableDef, key: tuple[int, ...]) -> list[float]:
        """Rewrite every measure of one fact"""
        measures = draw_measures(self._rng, 1, len(fact.measures))[0].tolist()
        params: dict[str, Any] = {f"m{index}": value for index, value in enumerate(measures)}
        params.update((f"k{index}", value) for index, value in enumerate(key))
        assignments = ", ".join(f"{self._ident(measure)} = :m{index}" for index, measure in enumerate(fact.measures))
        updated = self._backend.execute(
            f"UPDATE {self._ident(fact.table_name)} SET {assignments} WHERE {self._key_condition(fact.key_attrs)}",
            params,
        )
        if not updated:
            raise StaleKeyError(f"{fact.table_name} has no key {key}")
        return measures

    def random_dim_key(self, level: HierarchyLevelDef) -> int:
        return self._rng.random_key(self._count(level.table_name))

    def random_fact_key(self, fact: FactTableDef) -> tuple[int, ...]:
        """Existing composite key, skewed like `random_key` over the table ordered by key"""
        offset = self._rng.random_key(self._count(fact.table_name)) - 1
        columns = ", ".join(self._ident(key) for key in fact.key_attrs)
        rows = self._backend.fetch_all(
            f"SELECT {columns} FROM {self._ident(fact.table_name)} ORDER BY {columns} LIMIT 1 OFFSET :offset",
            {"offset": offset},
        )
        if not rows:
            raise StaleKeyError(f"{fact.table_name} has no row at offset {offset}")
        return tuple(int(value) for value in rows[0])

    def modify_with_retry(self, table_name: str, draw_key: Callable[[], Any], modify: Callable[[Any], Any]) -> None:
        """Modify a random row, drawing a second key once if the first one is stale"""
        try:
            modify(draw_key())
        except StaleKeyError as exc:
            LOGGER.warning(f"Stale key in {table_name}, drawing another one: {exc}")
            self._counts.pop(table_name, None)
            modify(draw_key())

    def _fact_exists(self, fact: FactTableDef, key: tuple[int, ...]) -> bool:
        count = self._backend.scalar(
            f"SELECT COUNT(*) FROM {self._ident(fact.table_name)} WHERE {self._key_condition(fact.key_attrs)}",
            {f"k{index}": value for index, value in enumerate(key)},
        )
        return bool(count)

    def _insert(self, table: str, values: dict[str, Any]) -> None:
        names = list(values)
        placeholders = [f"v{index}" for index in range(len(names))]
        self._backend.execute(
            f"INSERT INTO {self._ident(table)} ({', '.join(self._ident(name) for name in names)}) "
            f"VALUES ({', '.join(':' + name for name in placeholders)})",
            dict(zip(placeholders, values.values(), strict=True)),
        )


def refresh_dimensions(plan: RefreshPlan, schema: WarehouseSchema, backend: Backend, rng: SeededRng) -> RefreshOutcome:
    """Apply the dimension part of `plan`, coarsest level first within each dimension"""
    refresher = WarehouseRefresher(schema, backend, rng)
    with Timer() as timer:
        for quota in plan.levels:
            level = schema.level_by_table(quota.table_name)
            for _ in range(quota.inserts):
                refresher.insert_into_dim(level)
            for _ in range(quota.modifies):
                refresher.modify_with_retry(
                    level.table_name,
                    lambda level=level: refresher.random_dim_key(level),
                    lambda key, level=level: refresher.modify_dim(level, key),
                )
    outcome = RefreshOutcome(
        sum(quota.inserts for quota in plan.levels),
        sum(quota.modifies for quota in plan.levels),
        timer.time,
    )
    LOGGER.debug(f"Dimension refresh: {outcome.inserts} inserts, {outcome.modifies} modifies in {timer.time:.3f}s")
    return outcome


def refresh_facts(plan: RefreshPlan, schema: WarehouseSchema, backend: Backend, rng: SeededRng) -> RefreshOutcome:
    """Apply the fact table part of `plan`"""
    refresher = WarehouseRefresher(schema, backend, rng)
    with Timer() as timer:
        for quota in plan.facts:
            fact = schema.fact_table(quota.table_name)
            for _ in range(quota.inserts):
                refresher.insert_into_ft(fact)
            for _ in range(quota.modifies):
                refresher.modify_with_retry(
                    fact.table_name,
                    lambda fact=fact: refresher.random_fact_key(fact),
                    lambda key, fact=fact: refresher.modify_ft(fact, key),
                )
    outcome = RefreshOutcome(
        sum(quota.inserts for quota in plan.facts),
        sum(quota.modifies for quota in plan.facts),
        timer.time,
    )
    LOGGER.debug(f"Fact refresh: {outcome.inserts} inserts, {outcome.modifies} modifies in {timer.time:.3f}s")
    return outcome


def execute_refresh(plan: RefreshPlan, schema: WarehouseSchema, backend: Backend, rng: SeededRng) -> RefreshOutcome:
    """Dimensions first so fact inserts can reference new members"""
    return refresh_dimensions(plan, schema, backend, rng) + refresh_facts(plan, schema, backend, rng)
