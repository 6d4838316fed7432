from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, NamedTuple

from warebench.errors import ConfigTooLargeError
from warebench.hashing import INT64_MAX
from warebench.utils import round_half_up

if TYPE_CHECKING:
    from warebench.model import WarehouseSchema
    from warebench.params import LowLevelParams

LOGGER = logging.getLogger(__name__)

KEY_BYTES = 4
MEASURE_BYTES = 4
STRING_BYTES = 20
MAX_CARDINALITY_LOG10 = math.log10(INT64_MAX)


class SizeEstimate(NamedTuple):
    """Expected rows and bytes per table; `too_large` flags configurations whose size can't be represented"""

    rows: dict[str, float]
    bytes_per_table: dict[str, float]
    total_bytes: float
    too_large: bool = False


def member_width(attribute: str) -> int:
    """
    >>> member_width("DIM1_1_DESCR1")
    33
    """
    return STRING_BYTES + len(attribute)


def level_cardinality(hhlevel_size: int, dim_sfactor: float, nb_levels: int, level: int) -> int:
    """
    Target row count of `level` (1 = finest).

    Raises `ConfigTooLargeError` when the count doesn't fit a 64-bit key.

    >>> [level_cardinality(10, 10, 3, level) for level in (1, 2, 3)]
    [1000, 100, 10]
    """
    exponent = nb_levels - level
    if math.log10(hhlevel_size) + exponent * math.log10(dim_sfactor) > MAX_CARDINALITY_LOG10:
        raise ConfigTooLargeError(
            f"Level {level} of {nb_levels} would hold more than {INT64_MAX} rows "
            f"(hhlevel_size={hhlevel_size}, dim_sfactor={dim_sfactor})",
        )
    return max(1, round_half_up(hhlevel_size * dim_sfactor**exponent))


def estimate_size(low: LowLevelParams, schema: WarehouseSchema = None) -> SizeEstimate:
    """
    Expected warehouse size from the row-width model.

    Without `schema`, fact table `f` is assumed to reference the first `nb_dim(f)` dimensions;
    the estimate is independent of which dimensions are picked whenever their finest cardinalities are equal.
    """
    rows: dict[str, float] = {}
    widths: dict[str, float] = {}
    finest_rows: list[float] = []
    for dim in range(low.tot_nb_dim):
        nb_levels = low.nb_levels[dim]
        for level in range(1, nb_levels + 1):
            table_name = f"DIM{dim + 1}_{level}"
            try:
                cardinality = float(level_cardinality(low.hhlevel_size[dim], low.dim_sfactor[dim], nb_levels, level))
            except ConfigTooLargeError:
                cardinality = math.inf
            rows[table_name] = cardinality
            width = KEY_BYTES + sum(
                member_width(f"{table_name}_DESCR{k}") for k in range(1, low.nb_att[dim][level - 1] + 1)
            )
            if level < nb_levels:
                width += KEY_BYTES
            widths[table_name] = width
        finest_rows.append(rows[f"DIM{dim + 1}_1"])

    for fact in range(low.nb_ft):
        table_name = f"FT{fact + 1}"
        if schema is not None:
            dim_refs = [index - 1 for index in schema.fact_table(table_name).dim_refs]
        else:
            dim_refs = list(range(low.nb_dim[fact]))
        rows[table_name] = low.density[fact] * math.prod(finest_rows[dim] for dim in dim_refs)
        widths[table_name] = KEY_BYTES * len(dim_refs) + MEASURE_BYTES * low.nb_meas[fact]

    bytes_per_table = {name: rows[name] * widths[name] for name in rows}
    total_bytes = math.fsum(bytes_per_table.values())
    too_large = not math.isfinite(total_bytes) or total_bytes > INT64_MAX
    if too_large:
        LOGGER.warning(f"Estimated warehouse size can't be represented: {total_bytes} bytes")
    return SizeEstimate(rows, bytes_per_table, total_bytes, too_large)
