"""
Warehouse extension generation.

Every table draws from its own stream `data:<table>` derived from the master seed, so the generated
content depends only on parameters and seed, never on batch size, backend or table generation order.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Callable
from pathlib import Path
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np

from warebench.errors import ConfigTooLargeError, LoadError, WarebenchError
from warebench.model import WarehouseStats
from warebench.params import DEFAULT_BATCH_SIZE, DEFAULT_MAX_FACT_CANDIDATES
from warebench.timing import Timer

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from warebench.backend import Backend
    from warebench.model import DimensionDef, FactTableDef, HierarchyLevelDef, WarehouseSchema
    from warebench.randomizer import SeededRng

LOGGER = logging.getLogger(__name__)

# Generation block size, fixed so data is independent of the insert batch size
BLOCK_SIZE = 4096
MEASURE_LOW = 0.0
MEASURE_HIGH = 100.0
# Largest float32 below MEASURE_HIGH; float32 rounding may otherwise reach the open bound
MEASURE_MAX = float(np.nextafter(np.float32(MEASURE_HIGH), np.float32(0)))

Row = tuple[Any, ...]


class TupleBatch(NamedTuple):
    table_name: str
    attributes: tuple[str, ...]
    rows: list[Row]
    ordinal: int


Sink = Callable[[TupleBatch], Any]


class BatchWriter:
    """Regroups generated rows into batches of `batch_size` for a sink"""

    def __init__(self, table_name: str, attributes: Sequence[str], sink: Sink, batch_size: int) -> None:
        self._table_name = table_name
        self._attributes = tuple(attributes)
        self._sink = sink
        self._batch_size = batch_size
        self._buffer: list[Row] = []
        self._ordinal = 0
        self.row_count = 0

    def __enter__(self) -> BatchWriter:
        return self

    def __exit__(self, exc_type, *_) -> None:
        if exc_type is None:
            self.flush()

    def write(self, rows: Sequence[Row]) -> None:
        self._buffer.extend(rows)
        while len(self._buffer) >= self._batch_size:
            self._send(self._buffer[: self._batch_size])
            self._buffer = self._buffer[self._batch_size :]

    def flush(self) -> None:
        if self._buffer:
            self._send(self._buffer)
            self._buffer = []

    def _send(self, rows: list[Row]) -> None:
        self._sink(TupleBatch(self._table_name, self._attributes, rows, self._ordinal))
        LOGGER.debug(f"{self._table_name}: batch {self._ordinal} with {len(rows)} rows")
        self._ordinal += 1
        self.row_count += len(rows)


def draw_measures(rng: SeededRng, size: int, nb_meas: int) -> np.ndarray:
    """Single-precision measures in `[0, 100)`, one row of `nb_meas` values per tuple"""
    values = rng.uniform_floats(MEASURE_LOW, MEASURE_HIGH, (size, nb_meas)).astype(np.float32)
    return np.minimum(values, np.float32(MEASURE_MAX))


def iter_level_rows(
    level: HierarchyLevelDef,
    coarser_size: int | None,
    rng: SeededRng,
) -> Iterator[list[Row]]:
    """Blocks of rows with sequential keys, random members and, below the coarsest level, a random coarser key"""
    for start in range(0, level.target_cardinality, BLOCK_SIZE):
        stop = min(start + BLOCK_SIZE, level.target_cardinality)
        size = stop - start
        columns: list[list[Any]] = [list(range(start + 1, stop + 1))]
        columns.extend(rng.random_strings(member, size) for member in level.members)
        if level.foreign_key is not None:
            columns.append(rng.random_keys(coarser_size, size).tolist())
        yield list(zip(*columns, strict=True))


def generate_dimension(
    dimension: DimensionDef,
    rng: SeededRng,
    sink: Sink,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> dict[str, int]:
    """
    Generate every level of `dimension`, coarsest first.

    :return: row count per level table, in generation order
    """
    counts: dict[str, int] = {}
    coarser_size: int | None = None
    for level in reversed(dimension.levels):
        table_rng = rng.spawn(f"data:{level.table_name}")
        with BatchWriter(level.table_name, level.attributes, sink, batch_size) as writer:
            for rows in iter_level_rows(level, coarser_size, table_rng):
                writer.write(rows)
        counts[level.table_name] = writer.row_count
        coarser_size = writer.row_count
        LOGGER.info(f"Generated {writer.row_count} rows for {level.table_name}")
    return counts


def fact_candidate_count(fact: FactTableDef, schema: WarehouseSchema) -> int:
    return math.prod(schema.dimension(dim).finest.target_cardinality for dim in fact.dim_refs)


def check_fact_size(fact: FactTableDef, schema: WarehouseSchema, max_candidates: int) -> None:
    candidates = fact_candidate_count(fact, schema)
    if candidates > max_candidates:
        raise ConfigTooLargeError(
            f"{fact.table_name} has {candidates} candidate key combinations, more than the limit of "
            f"{max_candidates} (MAX_FACT_CANDIDATES)",
        )


def check_fact_sizes(schema: WarehouseSchema, max_candidates: int) -> None:
    for fact in schema.fact_tables:
        check_fact_size(fact, schema, max_candidates)


def iter_fact_rows(fact: FactTableDef, schema: WarehouseSchema, rng: SeededRng) -> Iterator[list[Row]]:
    """
    Blocks of fact rows.

    Candidate key combinations are enumerated row-major over `fact.dim_refs`; each one is kept
    with probability `fact.density`.
    """
    cardinalities = tuple(schema.dimension(dim).finest.target_cardinality for dim in fact.dim_refs)
    total = math.prod(cardinalities)
    nb_meas = len(fact.measures)
    for start in range(0, total, BLOCK_SIZE):
        ordinals = np.arange(start, min(start + BLOCK_SIZE, total), dtype=np.int64)
        kept = ordinals[rng.generator.random(len(ordinals)) < fact.density]
        if not len(kept):
            continue
        keys = np.stack(np.unravel_index(kept, cardinalities), axis=1) + 1
        measures = draw_measures(rng, len(kept), nb_meas)
        yield [(*key, *values) for key, values in zip(keys.tolist(), measures.tolist(), strict=True)]


def generate_fact(
    fact: FactTableDef,
    schema: WarehouseSchema,
    rng: SeededRng,
    sink: Sink,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_candidates: int = DEFAULT_MAX_FACT_CANDIDATES,
) -> int:
    """Generate the extension of `fact`; its dimensions must already be generated"""
    check_fact_size(fact, schema, max_candidates)
    table_rng = rng.spawn(f"data:{fact.table_name}")
    with BatchWriter(fact.table_name, fact.attributes, sink, batch_size) as writer:
        for rows in iter_fact_rows(fact, schema, table_rng):
            writer.write(rows)
    LOGGER.info(f"Generated {writer.row_count} rows for {fact.table_name}")
    return writer.row_count


class LoadResult(NamedTuple):
    stats: WarehouseStats
    duration: float


def load_warehouse(
    schema: WarehouseSchema,
    rng: SeededRng,
    backend: Backend,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_candidates: int = DEFAULT_MAX_FACT_CANDIDATES,
) -> LoadResult:
    """
    Generate and bulk-insert all dimensions, then all fact tables.

    On failure the warehouse is left as is and the error names the last fully loaded table.
    """
    check_fact_sizes(schema, max_candidates)
    counts: dict[str, int] = {}
    last_completed: str | None = None
    with Timer() as timer:
        try:
            for dimension in schema.dimensions:
                level_counts = generate_dimension(dimension, rng, backend.bulk_insert, batch_size=batch_size)
                for table, count in level_counts.items():
                    counts[table] = count
                    last_completed = table
            for fact in schema.fact_tables:
                counts[fact.table_name] = generate_fact(
                    fact,
                    schema,
                    rng,
                    backend.bulk_insert,
                    batch_size=batch_size,
                    max_candidates=max_candidates,
                )
                last_completed = fact.table_name
        except WarebenchError as exc:
            raise LoadError(f"Load failed after {last_completed or 'no table'}: {exc}", last_completed) from exc
    stats = WarehouseStats({table: counts[table] for table in schema.table_names})
    LOGGER.info(f"Loaded {stats.global_size} tuples in {timer.time:.3f}s")
    return LoadResult(stats, timer.time)


def export_csv(
    schema: WarehouseSchema,
    rng: SeededRng,
    directory: Path,
    *,
    max_candidates: int = DEFAULT_MAX_FACT_CANDIDATES,
) -> dict[str, Path]:
    """
    Write one `<table>.csv` per table, header = attribute names.

    Uses the same streams as `load_warehouse`, so the files hold exactly the loaded data.
    """
    check_fact_sizes(schema, max_candidates)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {table_name: directory / f"{table_name}.csv" for table_name in schema.table_names}
    files = {table_name: path.open("w", newline="") for table_name, path in paths.items()}
    try:
        writers = {table_name: csv.writer(f) for table_name, f in files.items()}
        for table_name, writer in writers.items():
            writer.writerow(schema.table_attributes(table_name))

        def sink(batch: TupleBatch) -> None:
            writers[batch.table_name].writerows(batch.rows)

        for dimension in schema.dimensions:
            generate_dimension(dimension, rng, sink)
        for fact in schema.fact_tables:
            generate_fact(fact, schema, rng, sink, max_candidates=max_candidates)
    finally:
        for f in files.values():
            f.close()
    LOGGER.info(f"Exported {len(paths)} tables to {directory}")
    return paths
