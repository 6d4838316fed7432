"""
Benchmark protocol and its results.

A load test fills the warehouse; a performance test runs the workload once cold,
then `repn` times a refresh followed by the workload (warm runs).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from warebench.datagen import load_warehouse
from warebench.errors import PreconditionError, QueryError, ResultsParseError
from warebench.etl import execute_refresh, plan_refresh
from warebench.params import DEFAULT_BATCH_SIZE, DEFAULT_MAX_FACT_CANDIDATES, FailPolicy, ProtocolParams
from warebench.schema import emit_ddl
from warebench.timing import Timer, to_milliseconds
from warebench.utils import clamp

if TYPE_CHECKING:
    from collections.abc import Sequence

    from warebench.backend import Backend
    from warebench.model import WarehouseSchema, WarehouseStats
    from warebench.params import EtlParams
    from warebench.randomizer import SeededRng
    from warebench.workload import Workload

LOGGER = logging.getLogger(__name__)

CSV_HEADER = ("run", "phase", "kind", "duration_ms")
COLD_RUN = "cold"
WARM_RUN_PREFIX = "warm"
NO_KIND = "-"


def run_label(run: int) -> str:
    """
    >>> run_label(0), run_label(2)
    ('cold', 'warm2')
    """
    return COLD_RUN if run == 0 else f"{WARM_RUN_PREFIX}{run}"


def parse_run_label(label: str) -> int:
    if label == COLD_RUN:
        return 0
    if label.startswith(WARM_RUN_PREFIX) and label.removeprefix(WARM_RUN_PREFIX).isdigit():
        run = int(label.removeprefix(WARM_RUN_PREFIX))
        if run >= 1:
            return run
    raise ResultsParseError(f"Unknown run label {label!r}")


@dataclass
class RunTimings:
    """
    Durations in seconds.

    `etime[0]` is the cold run, `etime[i]` and `rtime[i - 1]` belong to warm run `i`.
    `query_times[run][q]` is `None` for a query that failed.
    """

    etime: list[float] = field(default_factory=list)
    rtime: list[float] = field(default_factory=list)
    query_times: list[list[float | None]] = field(default_factory=list)
    load_time: float | None = None

    @property
    def repn(self) -> int:
        return len(self.rtime)

    def refresh_time(self, run: int) -> float:
        return self.rtime[run - 1]

    @property
    def failed(self) -> list[tuple[int, int]]:
        """`(run, query number)` of every failed query"""
        return [
            (run, number)
            for run, durations in enumerate(self.query_times)
            for number, duration in enumerate(durations, start=1)
            if duration is None
        ]


class LoadReport(NamedTuple):
    load_time: float
    stats: WarehouseStats
    nb_statements: int


class SeriesSummary(NamedTuple):
    global_time: float
    average: float
    minimum: float
    maximum: float
    stdev: float
    count: int


class MetricsSummary(NamedTuple):
    """Warm-run series; `None` stands for a series without values"""

    cold: float | None
    workload: SeriesSummary | None
    refresh: SeriesSummary | None
    combined: SeriesSummary | None

    def series(self) -> dict[str, SeriesSummary | None]:
        return {"workload": self.workload, "refresh": self.refresh, "combined": self.combined}


# Protocol


def run_load_test(
    schema: WarehouseSchema,
    rng: SeededRng,
    backend: Backend,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_candidates: int = DEFAULT_MAX_FACT_CANDIDATES,
    constraints: bool = True,
) -> LoadReport:
    """
    Create the warehouse tables and fill them.

    Existing tables are not dropped; creating one again surfaces the backend's name conflict.
    """
    statements = emit_ddl(schema, backend.dialect, constraints=constraints)
    with Timer() as timer:
        nb_statements = backend.execute_ddl(statements)
        LOGGER.info(f"Created {nb_statements} tables")
        result = load_warehouse(schema, rng, backend, batch_size=batch_size, max_candidates=max_candidates)
    LOGGER.info(f"Load test finished in {timer.time:.3f}s: {result.stats.global_size} tuples")
    return LoadReport(timer.time, result.stats, nb_statements)


def check_loaded(schema: WarehouseSchema, backend: Backend) -> None:
    missing = sorted(set(schema.table_names) - set(backend.existing_tables()))
    if missing:
        raise PreconditionError(f"Warehouse is not loaded, missing tables: {', '.join(missing)}")


def run_workload(
    queries: Sequence[str],
    backend: Backend,
    *,
    label: str = COLD_RUN,
    fail_policy: FailPolicy = FailPolicy.ABORT,
) -> tuple[float, list[float | None]]:
    """
    Execute every query once, in order.

    :return: wall-clock time of the whole workload and the per-query durations
    """
    durations: list[float | None] = []
    with Timer() as timer:
        for number, sql in enumerate(queries, start=1):
            try:
                row_count, duration = backend.execute_timed(sql)
            except QueryError as exc:
                if fail_policy is FailPolicy.ABORT:
                    raise QueryError(f"{label} run, query {number}: {exc}", exc.excerpt) from exc
                LOGGER.warning(f"{label} run, query {number} failed: {exc}")
                durations.append(None)
                continue
            LOGGER.debug(f"{label} run, query {number}: {row_count} rows in {duration:.4f}s")
            durations.append(duration)
    return timer.time, durations


def run_performance_test(
    workload: Workload,
    schema: WarehouseSchema,
    etl_params: EtlParams,
    protocol: ProtocolParams,
    backend: Backend,
    rng: SeededRng,
) -> RunTimings:
    """
    Cold run, then `protocol.repn` warm runs each preceded by a refresh.

    Refresh quotas are planned from table counts taken right before each refresh, outside its timing.
    """
    check_loaded(schema, backend)
    queries = _render_for(workload, backend)
    timings = RunTimings()

    etime, durations = run_workload(queries, backend, label=COLD_RUN, fail_policy=protocol.fail_policy)
    timings.etime.append(etime)
    timings.query_times.append(durations)
    LOGGER.info(f"Cold run: {etime:.3f}s")

    for run in range(1, protocol.repn + 1):
        label = run_label(run)
        refresh_rng = rng.spawn(f"refresh:{run}")
        stats = backend.warehouse_stats(schema)
        plan = plan_refresh(etl_params, stats, schema, refresh_rng)
        outcome = execute_refresh(plan, schema, backend, refresh_rng)
        timings.rtime.append(outcome.duration)

        etime, durations = run_workload(queries, backend, label=label, fail_policy=protocol.fail_policy)
        timings.etime.append(etime)
        timings.query_times.append(durations)
        LOGGER.info(
            f"{label}: refresh {outcome.duration:.3f}s ({outcome.inserts} inserts, {outcome.modifies} modifies), "
            f"workload {etime:.3f}s",
        )
    return timings


def _render_for(workload: Workload, backend: Backend) -> list[str]:
    if workload.dialect != backend.dialect.name:
        LOGGER.info(f"Rendering the {workload.dialect} workload for {backend.dialect.name}")
    return workload.render(backend.dialect)


# Metrics


def summarize_series(values: Sequence[float]) -> SeriesSummary | None:
    """
    >>> summarize_series([2.0, 4.0])
    SeriesSummary(global_time=6.0, average=3.0, minimum=2.0, maximum=4.0, stdev=1.0, count=2)
    >>> summarize_series([]) is None
    True
    """
    if not values:
        return None
    minimum, maximum = min(values), max(values)
    total = math.fsum(values)
    average = clamp(total / len(values), minimum, maximum)
    return SeriesSummary(total, average, minimum, maximum, float(np.std(values)), len(values))


def summarize(timings: RunTimings) -> MetricsSummary:
    warm = timings.etime[1:]
    return MetricsSummary(
        cold=timings.etime[0] if timings.etime else None,
        workload=summarize_series(warm),
        refresh=summarize_series(timings.rtime),
        combined=summarize_series([refresh + etime for refresh, etime in zip(timings.rtime, warm, strict=True)]),
    )


def format_summary(summary: MetricsSummary) -> str:
    """Aligned text table in milliseconds"""
    columns = ("global_ms", "avg_ms", "min_ms", "max_ms", "stdev_ms")
    lines = [f"{'series':<10}" + "".join(f"{column:>12}" for column in columns)]
    if summary.cold is not None:
        lines.append(f"{COLD_RUN:<10}{to_milliseconds(summary.cold):>12}")
    for name, series in summary.series().items():
        if series is None:
            lines.append(f"{name:<10}{'(no warm run)':>12}")
            continue
        values = (series.global_time, series.average, series.minimum, series.maximum, series.stdev)
        lines.append(f"{name:<10}" + "".join(f"{value * 1000:>12.1f}" for value in values))
    return "\n".join(lines)


# Results file


def write_csv(timings: RunTimings, summary: MetricsSummary, path: Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for run, etime in enumerate(timings.etime):
            label = run_label(run)
            if run:
                writer.writerow((label, "refresh", NO_KIND, to_milliseconds(timings.refresh_time(run))))
            writer.writerow((label, "workload", NO_KIND, to_milliseconds(etime)))
            for number, duration in enumerate(timings.query_times[run], start=1):
                if duration is not None:
                    writer.writerow((label, "query", number, to_milliseconds(duration)))
        for run, number in timings.failed:
            writer.writerow(("# failed", run_label(run), number))
        if timings.load_time is not None:
            writer.writerow((f"# load_ms={to_milliseconds(timings.load_time)}",))
        writer.writerow(("# stdev=population",))
        for name, series in summary.series().items():
            if series is None:
                writer.writerow(("# summary", name, "empty"))
                continue
            writer.writerow((
                "# summary",
                name,
                f"global_ms={series.global_time * 1000:.3f}",
                f"avg_ms={series.average * 1000:.3f}",
                f"min_ms={series.minimum * 1000:.3f}",
                f"max_ms={series.maximum * 1000:.3f}",
                f"stdev_ms={series.stdev * 1000:.3f}",
            ))
    LOGGER.info(f"Saved results to {path}")


def _parse_ms(value: str, line_number: int) -> float:
    if not value.isdigit():
        raise ResultsParseError(f"line {line_number}: duration must be a non-negative integer, got {value!r}")
    return int(value) / 1000


def read_csv(path: Path) -> RunTimings:
    """
    Timings stored by `write_csv`, at millisecond resolution.

    Failed queries come back as `None` durations.
    """
    path = Path(path)
    try:
        with path.open(newline="") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise ResultsParseError(f"Can't read results file {path}: {exc}") from exc
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ResultsParseError(f"{path} doesn't start with the {','.join(CSV_HEADER)} header")

    timings = RunTimings()
    queries: dict[int, dict[int, float | None]] = {}
    refreshes: dict[int, float] = {}
    for line_number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if row[0].startswith("#"):
            if row[0] == "# failed" and len(row) == 3 and row[2].isdigit():
                queries.setdefault(parse_run_label(row[1]), {})[int(row[2])] = None
            elif row[0].startswith("# load_ms="):
                timings.load_time = _parse_ms(row[0].removeprefix("# load_ms="), line_number)
            continue
        if len(row) != len(CSV_HEADER):
            raise ResultsParseError(f"line {line_number}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        label, phase, kind, duration_ms = row
        run = parse_run_label(label)
        duration = _parse_ms(duration_ms, line_number)
        if phase == "workload":
            if run != len(timings.etime):
                raise ResultsParseError(f"line {line_number}: workload timing of {label} out of order")
            timings.etime.append(duration)
        elif phase == "refresh":
            if run == 0:
                raise ResultsParseError(f"line {line_number}: cold run has no refresh")
            refreshes[run] = duration
        elif phase == "query":
            if not kind.isdigit() or int(kind) < 1:
                raise ResultsParseError(f"line {line_number}: query kind must be its number, got {kind!r}")
            queries.setdefault(run, {})[int(kind)] = duration
        else:
            raise ResultsParseError(f"line {line_number}: unknown phase {phase!r}")

    if not timings.etime:
        raise ResultsParseError(f"{path} has no workload timing")
    if sorted(refreshes) != list(range(1, len(timings.etime))):
        raise ResultsParseError(f"{path} doesn't have one refresh timing per warm run")
    timings.rtime = [refreshes[run] for run in range(1, len(timings.etime))]
    for run in range(len(timings.etime)):
        run_queries = queries.get(run, {})
        nb_queries = max(run_queries, default=0)
        if sorted(run_queries) != list(range(1, nb_queries + 1)):
            raise ResultsParseError(f"{path}: query timings of {run_label(run)} are not contiguous")
        timings.query_times.append([run_queries[number] for number in range(1, nb_queries + 1)])
    return timings
