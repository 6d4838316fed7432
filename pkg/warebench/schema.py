from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING

from warebench.errors import ParameterError
from warebench.model import DimensionDef, FactTableDef, HierarchyLevelDef, WarehouseSchema
from warebench.params import validate_params
from warebench.sizing import level_cardinality

if TYPE_CHECKING:
    from collections.abc import Sequence

    from warebench.dialect import DialectDescriptor
    from warebench.params import LowLevelParams
    from warebench.randomizer import SeededRng

LOGGER = logging.getLogger(__name__)

# Members hold "<attribute>_<20-character referential entry>"
MEMBER_SUFFIX_LENGTH = 21


def dimension_table_name(dimension: int, level: int) -> str:
    return f"DIM{dimension}_{level}"


def fact_table_name(fact: int) -> str:
    return f"FT{fact}"


def _build_dimension(low: LowLevelParams, index: int) -> DimensionDef:
    nb_levels = low.nb_levels[index - 1]
    levels = []
    for level in range(1, nb_levels + 1):
        table_name = dimension_table_name(index, level)
        levels.append(
            HierarchyLevelDef(
                table_name=table_name,
                dimension=index,
                level=level,
                primary_key=f"{table_name}_PK",
                members=tuple(f"{table_name}_DESCR{k}" for k in range(1, low.nb_att[index - 1][level - 1] + 1)),
                foreign_key=f"{table_name}_FK" if level < nb_levels else None,
                target_cardinality=level_cardinality(
                    low.hhlevel_size[index - 1],
                    low.dim_sfactor[index - 1],
                    nb_levels,
                    level,
                ),
            ),
        )
    return DimensionDef(index=index, levels=tuple(levels))


def build_schema(low: LowLevelParams, rng: SeededRng) -> WarehouseSchema:
    """
    Instantiate the warehouse intention: dimensions first, then fact tables.

    Each fact table references `nb_dim(f)` distinct dimensions drawn by `SeededRng.random_dimension`.
    """
    report = validate_params(low)
    if not report.ok:
        raise ParameterError(f"Invalid low-level parameters: {report}")

    dimensions = tuple(_build_dimension(low, index) for index in range(1, low.tot_nb_dim + 1))
    dimension_indices = [dimension.index for dimension in dimensions]
    fact_tables = []
    for index in range(1, low.nb_ft + 1):
        table_name = fact_table_name(index)
        dim_refs: list[int] = []
        for _ in range(low.nb_dim[index - 1]):
            dim_refs.append(rng.random_dimension(dimension_indices, dim_refs))
        fact_tables.append(
            FactTableDef(
                table_name=table_name,
                index=index,
                dim_refs=tuple(dim_refs),
                key_attrs=tuple(f"{table_name}_{dimension_table_name(dim, 1)}_FK" for dim in dim_refs),
                measures=tuple(f"{table_name}_MEAS{k}" for k in range(1, low.nb_meas[index - 1] + 1)),
                density=low.density[index - 1],
            ),
        )
    schema = WarehouseSchema(fact_tables=tuple(fact_tables), dimensions=dimensions)
    LOGGER.debug(
        f"Built schema with {len(schema.fact_tables)} fact tables and {len(schema.dimensions)} dimensions "
        f"({len(schema.table_names)} tables)",
    )
    return schema


def _level_ddl(
    schema: WarehouseSchema,
    level: HierarchyLevelDef,
    dialect: DialectDescriptor,
    *,
    constraints: bool,
) -> str:
    ident = dialect.render_identifier
    integer = dialect.type_name("integer")
    columns = [f"{ident(level.primary_key)} {integer} NOT NULL"]
    columns.extend(
        f"{ident(member)} {dialect.type_name('char', len(member) + MEMBER_SUFFIX_LENGTH)} NOT NULL"
        for member in level.members
    )
    if level.foreign_key is not None:
        columns.append(f"{ident(level.foreign_key)} {integer} NOT NULL")
    if constraints:
        columns.append(f"PRIMARY KEY ({ident(level.primary_key)})")
        if level.foreign_key is not None:
            coarser = schema.dimension(level.dimension).coarser_link(level)
            columns.append(
                f"FOREIGN KEY ({ident(level.foreign_key)}) "
                f"REFERENCES {ident(coarser.table_name)} ({ident(coarser.primary_key)})",
            )
    return f"CREATE TABLE {ident(level.table_name)} ({', '.join(columns)})"


def _fact_ddl(
    schema: WarehouseSchema,
    fact: FactTableDef,
    dialect: DialectDescriptor,
    *,
    constraints: bool,
) -> str:
    ident = dialect.render_identifier
    integer = dialect.type_name("integer")
    real = dialect.type_name("real")
    columns = [f"{ident(key)} {integer} NOT NULL" for key in fact.key_attrs]
    columns.extend(f"{ident(measure)} {real} NOT NULL" for measure in fact.measures)
    if constraints:
        columns.append(f"PRIMARY KEY ({', '.join(ident(key) for key in fact.key_attrs)})")
        for dim, key in zip(fact.dim_refs, fact.key_attrs, strict=True):
            finest = schema.dimension(dim).finest
            columns.append(
                f"FOREIGN KEY ({ident(key)}) REFERENCES {ident(finest.table_name)} ({ident(finest.primary_key)})",
            )
    return f"CREATE TABLE {ident(fact.table_name)} ({', '.join(columns)})"


def emit_ddl(schema: WarehouseSchema, dialect: DialectDescriptor, *, constraints=True) -> list[str]:
    """
    CREATE TABLE statements in referential order.

    :param constraints: declare primary and foreign keys
    :return: one statement per hierarchy level (coarsest first within each dimension), then one per fact table
    """
    statements = [_level_ddl(schema, level, dialect, constraints=constraints) for level in schema.iter_levels()]
    statements.extend(_fact_ddl(schema, fact, dialect, constraints=constraints) for fact in schema.fact_tables)
    return statements


def write_ddl(statements: Sequence[str], path: Path) -> None:
    """One `;`-terminated statement per line"""
    path = Path(path)
    path.write_text("".join(f"{statement};\n" for statement in statements))
    LOGGER.info(f"Wrote {len(statements)} DDL statements to {path}")
