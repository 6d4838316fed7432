"""Warehouse metamodel: hierarchy levels, dimensions, fact tables and their extension sizes"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping


@dataclass(frozen=True)
class HierarchyLevelDef:
    """
    One hierarchy level of a dimension, in intention.

    `level` is 1 for the finest grain and `nb_levels` for the coarsest.
    `foreign_key` references the primary key of the next-coarser level and is `None` on the coarsest one.
    """

    table_name: str
    dimension: int
    level: int
    primary_key: str
    members: tuple[str, ...]
    foreign_key: str | None
    target_cardinality: int

    @property
    def attributes(self) -> tuple[str, ...]:
        """Column order of the table: key, members, then the hierarchy link"""
        if self.foreign_key is None:
            return (self.primary_key, *self.members)
        return (self.primary_key, *self.members, self.foreign_key)


@dataclass(frozen=True)
class DimensionDef:
    index: int
    levels: tuple[HierarchyLevelDef, ...]

    @property
    def nb_levels(self) -> int:
        return len(self.levels)

    @property
    def finest(self) -> HierarchyLevelDef:
        return self.levels[0]

    @property
    def coarsest(self) -> HierarchyLevelDef:
        return self.levels[-1]

    def level(self, level: int) -> HierarchyLevelDef:
        if not 1 <= level <= self.nb_levels:
            raise IndexError(f"Dimension {self.index} has no level {level} (levels 1..{self.nb_levels})")
        return self.levels[level - 1]

    def coarser_link(self, level: HierarchyLevelDef) -> HierarchyLevelDef | None:
        """Level the given one references through its foreign key"""
        if level.level >= self.nb_levels:
            return None
        return self.levels[level.level]

    def finer_link(self, level: HierarchyLevelDef) -> HierarchyLevelDef | None:
        """Level whose foreign key references the given one"""
        if level.level <= 1:
            return None
        return self.levels[level.level - 2]


@dataclass(frozen=True)
class FactTableDef:
    table_name: str
    index: int
    dim_refs: tuple[int, ...]
    key_attrs: tuple[str, ...]
    measures: tuple[str, ...]
    density: float

    @property
    def attributes(self) -> tuple[str, ...]:
        return (*self.key_attrs, *self.measures)

    def key_attr_for(self, dimension: int) -> str:
        return self.key_attrs[self.dim_refs.index(dimension)]


@dataclass(frozen=True)
class WarehouseSchema:
    fact_tables: tuple[FactTableDef, ...]
    dimensions: tuple[DimensionDef, ...]

    def dimension(self, index: int) -> DimensionDef:
        for dimension in self.dimensions:
            if dimension.index == index:
                return dimension
        raise KeyError(f"No dimension with index {index}")

    def fact_table(self, table_name: str) -> FactTableDef:
        for fact in self.fact_tables:
            if fact.table_name == table_name:
                return fact
        raise KeyError(f"No fact table named {table_name!r}")

    def iter_levels(self) -> Iterator[HierarchyLevelDef]:
        """Every hierarchy level, coarsest first within each dimension"""
        for dimension in self.dimensions:
            yield from reversed(dimension.levels)

    def level_by_table(self, table_name: str) -> HierarchyLevelDef:
        for level in self.iter_levels():
            if level.table_name == table_name:
                return level
        raise KeyError(f"No hierarchy level named {table_name!r}")

    @property
    def table_names(self) -> tuple[str, ...]:
        """All tables in creation order: dimension levels coarsest first, then fact tables"""
        return (
            *(level.table_name for level in self.iter_levels()),
            *(fact.table_name for fact in self.fact_tables),
        )

    def table_attributes(self, table_name: str) -> tuple[str, ...]:
        for fact in self.fact_tables:
            if fact.table_name == table_name:
                return fact.attributes
        return self.level_by_table(table_name).attributes


@dataclass(frozen=True)
class WarehouseStats:
    """Tuple count per table; `global_size` is their sum"""

    counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def global_size(self) -> int:
        return sum(self.counts.values())

    def count(self, table_name: str) -> int:
        return self.counts.get(table_name, 0)

    def __str__(self) -> str:
        per_table = ", ".join(f"{name}={count}" for name, count in self.counts.items())
        return f"global_size={self.global_size} ({per_table})"
