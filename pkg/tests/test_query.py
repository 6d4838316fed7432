from __future__ import annotations

import pytest

from warebench.errors import GenerationError
from warebench.query import (
    Aggregate,
    AttributeRef,
    ComparisonOp,
    Connector,
    GroupMode,
    Having,
    JoinCondition,
    QueryAst,
    QueryKind,
    Restriction,
)

MEMBER = AttributeRef("DIM1_1", "DIM1_1_DESCR1")
MEASURE = AttributeRef("FT1", "FT1_MEAS1")
JOIN = JoinCondition(AttributeRef("FT1", "FT1_DIM1_1_FK"), AttributeRef("DIM1_1", "DIM1_1_PK"))


def test_extraction_cannot_aggregate():
    with pytest.raises(GenerationError, match="Extraction"):
        QueryAst((MEMBER,), ("FT1", "DIM1_1"), QueryKind.EXTRACTION, aggregates=(Aggregate(MEASURE, "AGG1"),))


def test_olap_groups_by_selection():
    with pytest.raises(GenerationError, match="group by exactly"):
        QueryAst((MEMBER,), ("FT1", "DIM1_1"), QueryKind.OLAP, group_mode=GroupMode.CUBE)
    with pytest.raises(GenerationError, match="without a grouping mode"):
        QueryAst((MEMBER,), ("FT1", "DIM1_1"), QueryKind.OLAP, group_by=(MEMBER,))


def test_having_needs_known_alias():
    with pytest.raises(GenerationError, match="AGG2"):
        QueryAst(
            (MEMBER,),
            ("FT1", "DIM1_1"),
            QueryKind.OLAP,
            aggregates=(Aggregate(MEASURE, "AGG1"),),
            group_mode=GroupMode.ROLLUP,
            group_by=(MEMBER,),
            having=Having("AGG2", ComparisonOp.GT, 1.0),
        )


def test_no_tables():
    with pytest.raises(GenerationError):
        QueryAst((), (), QueryKind.EXTRACTION)


def test_connectivity():
    query = QueryAst((MEMBER,), ("FT1", "DIM1_1"), QueryKind.EXTRACTION, join_conds=(JOIN,))
    assert query.is_connected()
    assert query.fact_table == "FT1"
    assert not QueryAst((MEMBER,), ("FT1", "DIM1_1"), QueryKind.EXTRACTION).is_connected()


def test_json():
    query = QueryAst(
        (MEMBER,),
        ("FT1", "DIM1_1"),
        QueryKind.OLAP,
        aggregates=(Aggregate(MEASURE, "AGG1"),),
        join_conds=(JOIN,),
        restrictions=(
            Restriction(MEMBER, ComparisonOp.EQ, "DIM1_1_DESCR1_x"),
            Restriction(MEMBER, ComparisonOp.IN, ["a", "b"], Connector.OR),
        ),
        group_mode=GroupMode.CUBE,
        group_by=(MEMBER,),
        having=Having("AGG1", ComparisonOp.GE, 12.5),
        drill_depth=1,
        cursor=(1, 1),
    )
    data = query.to_json()
    assert data["restrictions"][1] == ["DIM1_1", "DIM1_1_DESCR1", "IN", ["a", "b"], "OR"]
    assert data["having"] == ["AGG1", ">=", 12.5]
    assert QueryAst.from_json(data) == query
    assert query.aggregate("AGG1").measure == MEASURE
    with pytest.raises(KeyError):
        query.aggregate("AGG9")
