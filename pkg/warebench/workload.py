"""Query workload generation and workload files"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from warebench.config import CONFIG_KEYS
from warebench.dialect import get_dialect
from warebench.errors import GenerationError, UnsupportedDialectError, WarebenchError, WorkloadParseError
from warebench.params import WorkloadParams
from warebench.query import (
    Aggregate,
    AttributeRef,
    ComparisonOp,
    GroupMode,
    Having,
    JoinCondition,
    QueryAst,
    QueryKind,
    Restriction,
)
from warebench.sql import render_sql

if TYPE_CHECKING:
    from warebench.dialect import DialectDescriptor
    from warebench.model import DimensionDef, FactTableDef, WarehouseSchema
    from warebench.randomizer import SeededRng

LOGGER = logging.getLogger(__name__)

HAVING_DECIMALS = 4
DEFAULT_DIALECT = "ansi"
WORKLOAD_PARAM_KEYS = {
    key: config_key.field for key, config_key in CONFIG_KEYS.items() if config_key.group == "workload"
}


@dataclass(frozen=True)
class Workload:
    queries: tuple[QueryAst, ...]
    params: WorkloadParams
    seed: int
    dialect: str = DEFAULT_DIALECT

    def render(self, dialect: DialectDescriptor = None) -> list[str]:
        """SQL of every query, in the workload dialect unless another one is given"""
        dialect = dialect or get_dialect(self.dialect)
        return [render_sql(query, dialect) for query in self.queries]

    @property
    def nb_olap(self) -> int:
        return sum(query.kind is QueryKind.OLAP for query in self.queries)


class _QueryBuilder:
    """Accumulates tables and joins so each level is joined once"""

    def __init__(self, fact: FactTableDef) -> None:
        self.fact = fact
        self.tables = [fact.table_name]
        self.joins: list[JoinCondition] = []
        self.select: list[AttributeRef] = []

    def join_through(self, dimension: DimensionDef, depth: int) -> None:
        """Join the fact table with levels 1..depth of `dimension`"""
        previous = AttributeRef(self.fact.table_name, self.fact.key_attr_for(dimension.index))
        for level in dimension.levels[:depth]:
            if level.table_name not in self.tables:
                self.tables.append(level.table_name)
                self.joins.append(JoinCondition(previous, AttributeRef(level.table_name, level.primary_key)))
            if level.foreign_key is not None:
                previous = AttributeRef(level.table_name, level.foreign_key)

    def add_attribute(self, attr: AttributeRef) -> None:
        if attr not in self.select:
            self.select.append(attr)


def build_initial_query(params: WorkloadParams, schema: WarehouseSchema, rng: SeededRng) -> QueryAst:
    """
    Random query over one fact table.

    Selected attributes are members of randomly deep hierarchy levels, every traversed level is joined.
    With probability `prob_olap` the query sums random measures grouped by CUBE or ROLLUP, possibly with HAVING.
    """
    fact = rng.random_fact_table(schema.fact_tables)
    builder = _QueryBuilder(fact)
    cursor: tuple[int, int] | None = None
    for _ in range(rng.gauss_int(params.q_avg_nb_att)):
        dimension = schema.dimension(rng.skewed_pick(fact.dim_refs))
        depth = rng.uniform_int(1, dimension.nb_levels)
        builder.join_through(dimension, depth)
        level = dimension.level(depth)
        builder.add_attribute(AttributeRef(level.table_name, rng.random_attribute(level.members)))
        cursor = (dimension.index, depth)

    restrictions = []
    for _ in range(rng.gauss_int(params.avg_nb_restr)):
        attr = rng.random_attribute(builder.select)
        restrictions.append(Restriction(attr, ComparisonOp.EQ, rng.random_string(attr.attribute)))

    select = tuple(builder.select)
    common = {
        "select_attrs": select,
        "tables": tuple(builder.tables),
        "join_conds": tuple(builder.joins),
        "restrictions": tuple(restrictions),
        "cursor": cursor,
    }
    if not rng.bernoulli(params.prob_olap):
        return QueryAst(kind=QueryKind.EXTRACTION, **common)

    aggregates = tuple(
        Aggregate(AttributeRef(fact.table_name, rng.random_measure(fact.measures)), f"AGG{number}")
        for number in range(1, rng.gauss_int(params.avg_nb_aggreg) + 1)
    )
    group_mode = GroupMode.CUBE if rng.bernoulli(params.prob_cube) else GroupMode.ROLLUP
    having = None
    if rng.bernoulli(params.prob_having):
        aggregate = rng.skewed_pick(aggregates)
        having = Having(aggregate.alias, ComparisonOp.GE, round(rng.uniform_float(0, 100), HAVING_DECIMALS))
    return QueryAst(
        kind=QueryKind.OLAP,
        aggregates=aggregates,
        group_mode=group_mode,
        group_by=select,
        having=having,
        **common,
    )


def derive_drilldowns(
    query: QueryAst,
    schema: WarehouseSchema,
    rng: SeededRng,
    avg_nb_dd: float = WorkloadParams.avg_nb_dd,
) -> list[QueryAst]:
    """
    Successive drill-downs of an OLAP query along the dimension it navigated last.

    Each variant adds one member of the next finer level; the chain ends at the finest level
    or when that level has no unselected member left.
    """
    if query.kind is not QueryKind.OLAP:
        raise GenerationError("Only OLAP queries can be drilled down")
    nb_drilldowns = rng.gauss_int(avg_nb_dd)
    if query.cursor is None:
        return []
    result: list[QueryAst] = []
    current = query
    dimension_index, depth = query.cursor
    dimension = schema.dimension(dimension_index)
    for _ in range(nb_drilldowns):
        if depth <= 1:
            break
        depth -= 1
        level = dimension.level(depth)
        candidates = [
            member for member in level.members if AttributeRef(level.table_name, member) not in current.select_attrs
        ]
        if not candidates:
            break
        attr = AttributeRef(level.table_name, rng.random_attribute(candidates))
        select = (*current.select_attrs, attr)
        current = dataclasses.replace(
            current,
            select_attrs=select,
            group_by=select,
            drill_depth=current.drill_depth + 1,
            cursor=(dimension_index, depth),
        )
        result.append(current)
    return result


def generate_workload(
    params: WorkloadParams,
    schema: WarehouseSchema,
    rng: SeededRng,
    *,
    seed: int = None,
    dialect: str = DEFAULT_DIALECT,
) -> Workload:
    """Queries until at least `nb_q` exist; every initial or drilled query counts once"""
    queries: list[QueryAst] = []
    while len(queries) < params.nb_q:
        query = build_initial_query(params, schema, rng)
        queries.append(query)
        if query.kind is QueryKind.OLAP:
            queries.extend(derive_drilldowns(query, schema, rng, params.avg_nb_dd))
    workload = Workload(tuple(queries), params, rng.seed if seed is None else seed, dialect)
    LOGGER.info(f"Generated {len(queries)} queries ({workload.nb_olap} OLAP)")
    return workload


# Workload files


def dump_workload(workload: Workload) -> str:
    dialect = get_dialect(workload.dialect)
    lines = [f"# SEED={workload.seed}", f"# DIALECT={dialect.name}"]
    lines.extend(
        f"# PARAM {key}={CONFIG_KEYS[key].value_type(getattr(workload.params, field_name))!r}"
        for key, field_name in WORKLOAD_PARAM_KEYS.items()
    )
    for number, query in enumerate(workload.queries, start=1):
        lines.append("")
        lines.append(f"-- QUERY {number} kind={query.kind.value} depth={query.drill_depth}")
        lines.append(f"-- AST {json.dumps(query.to_json(), separators=(',', ':'))}")
        lines.append(f"{render_sql(query, dialect)};")
    return "\n".join(lines) + "\n"


def save_workload(workload: Workload, path: Path) -> None:
    path = Path(path)
    path.write_text(dump_workload(workload))
    LOGGER.info(f"Saved {len(workload.queries)} queries to {path}")


def _parse_header(lines: list[tuple[int, str]]) -> tuple[int, str, WorkloadParams, int]:
    seed: int | None = None
    dialect = DEFAULT_DIALECT
    params: dict[str, float | int] = {}
    position = 0
    while position < len(lines) and lines[position][1].startswith("# "):
        line_number, line = lines[position]
        key, sep, value = line[2:].partition("=")
        if not sep:
            raise WorkloadParseError(f"expected KEY=value in header, got {line!r}", line_number)
        try:
            if key == "SEED":
                seed = int(value)
            elif key == "DIALECT":
                dialect = get_dialect(value).name
            elif key.startswith("PARAM ") and key.removeprefix("PARAM ") in WORKLOAD_PARAM_KEYS:
                name = key.removeprefix("PARAM ")
                params[WORKLOAD_PARAM_KEYS[name]] = CONFIG_KEYS[name].value_type(value)
            else:
                raise WorkloadParseError(f"unknown header line {line!r}", line_number)
        except (ValueError, UnsupportedDialectError) as exc:
            raise WorkloadParseError(f"bad header value: {exc}", line_number) from exc
        position += 1

    first_line = lines[0][0] if lines else 1
    if seed is None:
        raise WorkloadParseError("missing SEED header", first_line)
    try:
        workload_params = WorkloadParams(**params)
    except WarebenchError as exc:
        raise WorkloadParseError(f"invalid workload parameters: {exc}", first_line) from exc
    return seed, dialect, workload_params, position


def parse_workload(text: str) -> Workload:
    """Inverse of `dump_workload`; every query's SQL must match its re-rendered AST"""
    lines = [(number, line) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]
    seed, dialect_name, params, position = _parse_header(lines)
    dialect = get_dialect(dialect_name)
    queries: list[QueryAst] = []
    records = lines[position:]
    index = 0
    while index < len(records):
        line_number, line = records[index]
        expected = f"-- QUERY {len(queries) + 1} "
        if not line.startswith(expected):
            raise WorkloadParseError(f"expected {expected.strip()!r}, got {line!r}", line_number)
        if index + 2 >= len(records):
            raise WorkloadParseError("truncated query record", line_number)
        ast_number, ast_line = records[index + 1]
        if not ast_line.startswith("-- AST "):
            raise WorkloadParseError(f"expected query AST, got {ast_line!r}", ast_number)
        try:
            query = QueryAst.from_json(json.loads(ast_line.removeprefix("-- AST ")))
        except (ValueError, TypeError, KeyError, WarebenchError) as exc:
            raise WorkloadParseError(f"malformed query AST: {exc}", ast_number) from exc
        if line != f"{expected}kind={query.kind.value} depth={query.drill_depth}":
            raise WorkloadParseError(f"query header doesn't match its AST: {line!r}", line_number)
        sql_number, sql_line = records[index + 2]
        if not sql_line.endswith(";"):
            raise WorkloadParseError("query is not terminated by ';'", sql_number)
        if sql_line[:-1] != render_sql(query, dialect):
            raise WorkloadParseError("query text doesn't match its AST", sql_number)
        queries.append(query)
        index += 3
    if len(queries) < params.nb_q:
        last_line = records[-1][0] if records else (lines[-1][0] if lines else 1)
        raise WorkloadParseError(f"expected at least {params.nb_q} queries, found {len(queries)}", last_line)
    return Workload(tuple(queries), params, seed, dialect.name)


def load_workload(path: Path) -> Workload:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GenerationError(f"Can't read workload file {path}: {exc}") from exc
    workload = parse_workload(text)
    LOGGER.info(f"Loaded {len(workload.queries)} queries from {path}")
    return workload
