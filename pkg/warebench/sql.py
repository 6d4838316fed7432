"""
Rendering of `QueryAst` into single-line SQL text.

Dialects without native CUBE or ROLLUP get the equivalent UNION ALL of one plain GROUP BY per grouping set,
with attributes outside the grouping set replaced by NULL.
"""

from __future__ import annotations

import itertools
import logging
from typing import TYPE_CHECKING

from warebench.errors import UnsupportedConstructError
from warebench.query import ComparisonOp, Connector, GroupMode, QueryKind

if TYPE_CHECKING:
    from collections.abc import Sequence

    from warebench.dialect import DialectDescriptor
    from warebench.query import AttributeRef, QueryAst, Restriction

LOGGER = logging.getLogger(__name__)

GRAND_TOTAL_ALIAS = "GRAND"
PART_ALIAS = "PART"


def grouping_sets(mode: GroupMode, attributes: Sequence[AttributeRef]) -> list[tuple[AttributeRef, ...]]:
    """
    Grouping sets produced by `mode` over `attributes`.

    >>> [len(item) for item in grouping_sets(GroupMode.CUBE, ["A", "B"])]
    [2, 1, 1, 0]
    >>> grouping_sets(GroupMode.ROLLUP, ["A", "B", "C"])
    [('A', 'B', 'C'), ('A', 'B'), ('A',), ()]
    """
    attributes = tuple(attributes)
    if mode is GroupMode.CUBE:
        return [
            combination
            for size in range(len(attributes), -1, -1)
            for combination in itertools.combinations(attributes, size)
        ]
    if mode is GroupMode.ROLLUP:
        return [attributes[:size] for size in range(len(attributes), -1, -1)]
    return [attributes]


def _ref(attr: AttributeRef, dialect: DialectDescriptor) -> str:
    return dialect.qualified(attr.table, attr.attribute)


def _restriction(restriction: Restriction, dialect: DialectDescriptor) -> str:
    target = _ref(restriction.attribute, dialect)
    if restriction.op is ComparisonOp.IN:
        values = ", ".join(dialect.literal(value) for value in restriction.operand)
        return f"{target} IN ({values})"
    return f"{target} {restriction.op.value} {dialect.literal(restriction.operand)}"


def _where(query: QueryAst, dialect: DialectDescriptor) -> str:
    conditions = [f"{_ref(join.left, dialect)} = {_ref(join.right, dialect)}" for join in query.join_conds]
    if query.restrictions:
        parts = [_restriction(query.restrictions[0], dialect)]
        for restriction in query.restrictions[1:]:
            parts.append(f"{restriction.connector.value} {_restriction(restriction, dialect)}")
        clause = " ".join(parts)
        if any(restriction.connector is Connector.OR for restriction in query.restrictions[1:]):
            clause = f"({clause})"
        conditions.append(clause)
    if not conditions:
        return ""
    return " WHERE " + " AND ".join(conditions)


def _aggregate_expression(query: QueryAst, alias: str, dialect: DialectDescriptor) -> str:
    aggregate = query.aggregate(alias)
    return f"{aggregate.function}({_ref(aggregate.measure, dialect)})"


def _having(query: QueryAst, dialect: DialectDescriptor) -> str:
    having = query.having
    target = (
        dialect.render_identifier(having.alias)
        if dialect.supports_having_alias
        else _aggregate_expression(query, having.alias, dialect)
    )
    return f"{target} {having.op.value} {dialect.literal(having.value)}"


def _select_list(
    query: QueryAst,
    dialect: DialectDescriptor,
    grouping_set: Sequence[AttributeRef] = None,
) -> str:
    items = []
    for attr in query.select_attrs:
        if grouping_set is None or attr in grouping_set:
            items.append(_ref(attr, dialect))
        else:
            items.append(f"NULL AS {dialect.render_identifier(attr.attribute)}")
    items.extend(
        f"{aggregate.function}({_ref(aggregate.measure, dialect)}) AS {dialect.render_identifier(aggregate.alias)}"
        for aggregate in query.aggregates
    )
    return ", ".join(items)


def _from(query: QueryAst, dialect: DialectDescriptor) -> str:
    return " FROM " + ", ".join(dialect.render_identifier(table) for table in query.tables)


def _native(query: QueryAst, dialect: DialectDescriptor) -> str:
    sql = f"SELECT {_select_list(query, dialect)}{_from(query, dialect)}{_where(query, dialect)}"
    if query.group_by:
        attributes = ", ".join(_ref(attr, dialect) for attr in query.group_by)
        if query.group_mode is GroupMode.PLAIN:
            sql += f" GROUP BY {attributes}"
        else:
            sql += f" GROUP BY {query.group_mode.value} ({attributes})"
    if query.having is not None:
        sql += f" HAVING {_having(query, dialect)}"
    return sql


def _branch(query: QueryAst, dialect: DialectDescriptor, grouping_set: tuple[AttributeRef, ...]) -> str:
    sql = f"SELECT {_select_list(query, dialect, grouping_set)}{_from(query, dialect)}{_where(query, dialect)}"
    if grouping_set:
        sql += " GROUP BY " + ", ".join(_ref(attr, dialect) for attr in grouping_set)
    if query.having is None:
        return sql
    if grouping_set:
        return f"{sql} HAVING {_having(query, dialect)}"
    # Grand total: filter the single aggregate row from outside, HAVING needs a GROUP BY on some engines
    having = query.having
    return (
        f"SELECT * FROM ({sql}) AS {GRAND_TOTAL_ALIAS} "
        f"WHERE {dialect.render_identifier(having.alias)} {having.op.value} {dialect.literal(having.value)}"
    )


def union_all(branches: Sequence[str], max_members: int | None) -> str:
    """
    Combine SELECTs with UNION ALL, nesting them in derived tables when there are more than `max_members`

    >>> union_all(["SELECT 1", "SELECT 2"], None)
    'SELECT 1 UNION ALL SELECT 2'
    >>> union_all(["SELECT 1", "SELECT 2", "SELECT 3"], 2)
    'SELECT * FROM (SELECT 1 UNION ALL SELECT 2) AS PART1 UNION ALL SELECT * FROM (SELECT 3) AS PART2'
    """
    if max_members is None or len(branches) <= max_members:
        return " UNION ALL ".join(branches)
    if max_members < 2:
        raise UnsupportedConstructError(f"Can't combine grouping sets with at most {max_members} compound members")
    parts = [
        f"SELECT * FROM ({' UNION ALL '.join(branches[start : start + max_members])}) AS {PART_ALIAS}{number}"
        for number, start in enumerate(range(0, len(branches), max_members), start=1)
    ]
    return union_all(parts, max_members)


def render_sql(query: QueryAst, dialect: DialectDescriptor) -> str:
    """Canonical single-line SQL for `query` in `dialect`"""
    mode = query.group_mode
    if query.kind is QueryKind.EXTRACTION or mode in (GroupMode.NONE, GroupMode.PLAIN):
        return _native(query, dialect)
    native = dialect.supports_cube if mode is GroupMode.CUBE else dialect.supports_rollup
    if native:
        return _native(query, dialect)
    if not dialect.supports_union_all:
        raise UnsupportedConstructError(f"Dialect {dialect.name!r} supports neither {mode.value} nor UNION ALL")
    branches = [_branch(query, dialect, grouping_set) for grouping_set in grouping_sets(mode, query.group_by)]
    return union_all(branches, dialect.max_compound_select)
