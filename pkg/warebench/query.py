"""Structured workload queries: SELECT-FROM-WHERE with optional SUM aggregation, grouping and HAVING"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from warebench.errors import GenerationError


class QueryKind(str, Enum):
    OLAP = "OLAP"
    EXTRACTION = "EXTRACTION"


class GroupMode(str, Enum):
    NONE = "NONE"
    PLAIN = "PLAIN"
    CUBE = "CUBE"
    ROLLUP = "ROLLUP"


class ComparisonOp(str, Enum):
    EQ = "="
    NE = "<>"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    IN = "IN"


class Connector(str, Enum):
    AND = "AND"
    OR = "OR"


@dataclass(frozen=True)
class AttributeRef:
    table: str
    attribute: str

    def to_json(self) -> list[str]:
        return [self.table, self.attribute]

    @classmethod
    def from_json(cls, data: list[str]) -> AttributeRef:
        table, attribute = data
        return cls(table, attribute)


@dataclass(frozen=True)
class Aggregate:
    measure: AttributeRef
    alias: str
    function: str = "SUM"


@dataclass(frozen=True)
class JoinCondition:
    left: AttributeRef
    right: AttributeRef


@dataclass(frozen=True)
class Restriction:
    """`attribute op operand`; `connector` links it to the previous restriction"""

    attribute: AttributeRef
    op: ComparisonOp
    operand: Any
    connector: Connector = Connector.AND

    def __post_init__(self) -> None:
        if self.op is ComparisonOp.IN:
            if not isinstance(self.operand, tuple | list) or not self.operand:
                raise GenerationError(f"IN restriction needs a non-empty value list, got {self.operand!r}")
            object.__setattr__(self, "operand", tuple(self.operand))


@dataclass(frozen=True)
class Having:
    """Condition on the aggregate named `alias`"""

    alias: str
    op: ComparisonOp
    value: float


@dataclass(frozen=True)
class QueryAst:
    select_attrs: tuple[AttributeRef, ...]
    tables: tuple[str, ...]
    kind: QueryKind
    aggregates: tuple[Aggregate, ...] = ()
    join_conds: tuple[JoinCondition, ...] = ()
    restrictions: tuple[Restriction, ...] = ()
    group_mode: GroupMode = GroupMode.NONE
    group_by: tuple[AttributeRef, ...] = ()
    having: Having | None = None
    drill_depth: int = 0
    # Dimension and level the last selected attribute came from; drill-downs start from there
    cursor: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not self.tables:
            raise GenerationError("Query must read at least one table")
        if self.kind is QueryKind.EXTRACTION:
            if self.aggregates or self.group_mode is not GroupMode.NONE or self.group_by or self.having:
                raise GenerationError("Extraction query can't aggregate, group or filter groups")
        elif self.group_by != self.select_attrs:
            raise GenerationError("OLAP query must group by exactly its selected attributes")
        elif self.group_mode is GroupMode.NONE and self.group_by:
            raise GenerationError("Grouping attributes given without a grouping mode")
        if self.having is not None and self.having.alias not in {aggregate.alias for aggregate in self.aggregates}:
            raise GenerationError(f"HAVING references unknown aggregate {self.having.alias!r}")

    @property
    def fact_table(self) -> str:
        return self.tables[0]

    def aggregate(self, alias: str) -> Aggregate:
        for aggregate in self.aggregates:
            if aggregate.alias == alias:
                return aggregate
        raise KeyError(alias)

    def is_connected(self) -> bool:
        """Every table is reachable from the fact table through join conditions"""
        reached = {self.fact_table}
        changed = True
        while changed:
            changed = False
            for join in self.join_conds:
                pair = {join.left.table, join.right.table}
                if pair & reached and not pair <= reached:
                    reached |= pair
                    changed = True
        return reached >= set(self.tables)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "depth": self.drill_depth,
            "cursor": list(self.cursor) if self.cursor is not None else None,
            "select": [attr.to_json() for attr in self.select_attrs],
            "aggregates": [[*agg.measure.to_json(), agg.alias, agg.function] for agg in self.aggregates],
            "tables": list(self.tables),
            "joins": [[*join.left.to_json(), *join.right.to_json()] for join in self.join_conds],
            "restrictions": [
                [*restr.attribute.to_json(), restr.op.value, _operand_to_json(restr.operand), restr.connector.value]
                for restr in self.restrictions
            ],
            "group_mode": self.group_mode.value,
            "group_by": [attr.to_json() for attr in self.group_by],
            "having": (
                None if self.having is None else [self.having.alias, self.having.op.value, self.having.value]
            ),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> QueryAst:
        having = data.get("having")
        cursor = data.get("cursor")
        return cls(
            select_attrs=tuple(AttributeRef.from_json(item) for item in data["select"]),
            tables=tuple(data["tables"]),
            kind=QueryKind(data["kind"]),
            aggregates=tuple(
                Aggregate(AttributeRef(table, attribute), alias, function)
                for table, attribute, alias, function in data.get("aggregates", [])
            ),
            join_conds=tuple(
                JoinCondition(AttributeRef(left_table, left), AttributeRef(right_table, right))
                for left_table, left, right_table, right in data.get("joins", [])
            ),
            restrictions=tuple(
                Restriction(AttributeRef(table, attribute), ComparisonOp(op), operand, Connector(connector))
                for table, attribute, op, operand, connector in data.get("restrictions", [])
            ),
            group_mode=GroupMode(data.get("group_mode", GroupMode.NONE.value)),
            group_by=tuple(AttributeRef.from_json(item) for item in data.get("group_by", [])),
            having=None if having is None else Having(having[0], ComparisonOp(having[1]), having[2]),
            drill_depth=int(data.get("depth", 0)),
            cursor=None if cursor is None else (int(cursor[0]), int(cursor[1])),
        )


def _operand_to_json(operand: Any) -> Any:
    if isinstance(operand, tuple):
        return list(operand)
    return operand
