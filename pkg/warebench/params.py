"""Benchmark parameters: warehouse (high and low level), workload, refresh and protocol"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import TYPE_CHECKING, NamedTuple

from warebench.errors import ParameterError
from warebench.randomizer import DEFAULT_SIGMA_RATIO

if TYPE_CHECKING:
    from warebench.randomizer import SeededRng

LOGGER = logging.getLogger(__name__)

MIN_DENSITY = 0.01
DEFAULT_SEED = 1
DEFAULT_BATCH_SIZE = 1000
DEFAULT_MAX_FACT_CANDIDATES = 10**8


def _check_positive(owner: object, *names: str) -> None:
    for name in names:
        value = getattr(owner, name)
        if not value > 0:
            raise ParameterError(f"{owner.__class__.__name__}.{name} must be positive, got {value!r}")


def _check_probability(owner: object, *names: str) -> None:
    for name in names:
        value = getattr(owner, name)
        if not 0 <= value <= 1:
            raise ParameterError(f"{owner.__class__.__name__}.{name} must be within [0, 1], got {value!r}")


@dataclass(frozen=True)
class HighLevelParams:
    """Average values the low-level warehouse parameters are drawn around"""

    avg_nb_ft: float = 1
    avg_nb_dim: float = 5
    avg_tot_nb_dim: float = 5
    avg_nb_meas: float = 5
    avg_density: float = 0.6
    avg_nb_levels: float = 3
    avg_nb_att: float = 5
    avg_hhlevel_size: float = 10
    dim_sfactor: float = 10
    sigma_ratio: float = DEFAULT_SIGMA_RATIO

    def __post_init__(self) -> None:
        _check_positive(
            self,
            "avg_nb_ft",
            "avg_nb_dim",
            "avg_tot_nb_dim",
            "avg_nb_meas",
            "avg_density",
            "avg_nb_levels",
            "avg_nb_att",
            "avg_hhlevel_size",
            "dim_sfactor",
        )
        if self.avg_density > 1:
            raise ParameterError(f"avg_density must be within (0, 1], got {self.avg_density!r}")
        if self.sigma_ratio < 0:
            raise ParameterError(f"sigma_ratio must be non-negative, got {self.sigma_ratio!r}")


@dataclass(frozen=True)
class LowLevelParams:
    """
    Full per-table warehouse parameters.

    Lists are indexed by fact table (`nb_dim`, `nb_meas`, `density`) or by dimension (the rest);
    `nb_att[d][h]` is the member count of level `h` (0 = finest) of dimension `d`.
    """

    nb_ft: int
    tot_nb_dim: int
    nb_dim: tuple[int, ...]
    nb_meas: tuple[int, ...]
    density: tuple[float, ...]
    nb_levels: tuple[int, ...]
    nb_att: tuple[tuple[int, ...], ...]
    hhlevel_size: tuple[int, ...]
    dim_sfactor: tuple[float, ...]

    def __post_init__(self) -> None:
        # Accept lists from config files and keep the value hashable
        for name in ("nb_dim", "nb_meas", "density", "nb_levels", "hhlevel_size", "dim_sfactor"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "nb_att", tuple(tuple(row) for row in self.nb_att))


class ValidationReport(NamedTuple):
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return "; ".join(self.violations)


def validate_params(low: LowLevelParams) -> ValidationReport:
    """Check every low-level invariant; never raises"""
    violations: list[str] = []

    def check(condition: bool, message: str) -> None:  # noqa: FBT001
        if not condition:
            violations.append(message)

    check(low.nb_ft >= 1, f"nb_ft ≥ 1 (got {low.nb_ft})")
    check(low.tot_nb_dim >= 1, f"tot_nb_dim ≥ 1 (got {low.tot_nb_dim})")
    for name in ("nb_dim", "nb_meas", "density"):
        length = len(getattr(low, name))
        check(length == low.nb_ft, f"len({name}) = nb_ft (got {length}, expected {low.nb_ft})")
    for name in ("nb_levels", "nb_att", "hhlevel_size", "dim_sfactor"):
        length = len(getattr(low, name))
        check(length == low.tot_nb_dim, f"len({name}) = tot_nb_dim (got {length}, expected {low.tot_nb_dim})")

    check(low.tot_nb_dim <= sum(low.nb_dim), f"tot_nb_dim ≤ Σ nb_dim (got {low.tot_nb_dim} > {sum(low.nb_dim)})")
    for index, nb_dim in enumerate(low.nb_dim):
        check(nb_dim >= 1, f"nb_dim({index}) ≥ 1 (got {nb_dim})")
        check(nb_dim <= low.tot_nb_dim, f"nb_dim({index}) ≤ tot_nb_dim (got {nb_dim} > {low.tot_nb_dim})")
    for index, nb_meas in enumerate(low.nb_meas):
        check(nb_meas >= 1, f"nb_meas({index}) ≥ 1 (got {nb_meas})")
    for index, density in enumerate(low.density):
        check(0 < density <= 1, f"density in (0,1] (fact {index}, got {density})")

    for index, nb_levels in enumerate(low.nb_levels):
        check(nb_levels >= 1, f"nb_levels({index}) ≥ 1 (got {nb_levels})")
        if index < len(low.nb_att):
            row = low.nb_att[index]
            check(len(row) == nb_levels, f"len(nb_att({index})) = nb_levels({index}) (got {len(row)})")
            for level, nb_att in enumerate(row):
                check(nb_att >= 1, f"nb_att({index},{level}) ≥ 1 (got {nb_att})")
    for index, size in enumerate(low.hhlevel_size):
        check(size >= 1, f"hhlevel_size({index}) ≥ 1 (got {size})")
    for index, factor in enumerate(low.dim_sfactor):
        check(factor > 0 and math.isfinite(factor), f"dim_sfactor({index}) > 0 (got {factor})")
    return ValidationReport(tuple(violations))


def derive_low_level(high: HighLevelParams, rng: SeededRng) -> LowLevelParams:
    """
    Draw every low-level parameter around its high-level average.

    Counts are rounded half-up and clamped to at least one; densities are clamped into
    `[MIN_DENSITY, 1]` and scale factors to at least one.
    """
    nb_ft = rng.gauss_int(high.avg_nb_ft)
    tot_nb_dim = rng.gauss_int(high.avg_tot_nb_dim)
    nb_dim, nb_meas, density = [], [], []
    for _ in range(nb_ft):
        nb_dim.append(rng.gauss_int(high.avg_nb_dim, high=tot_nb_dim))
        nb_meas.append(rng.gauss_int(high.avg_nb_meas))
        density.append(rng.gauss_real(high.avg_density, MIN_DENSITY, 1))
    if sum(nb_dim) < tot_nb_dim:
        LOGGER.debug(f"Lowering tot_nb_dim from {tot_nb_dim} to Σ nb_dim = {sum(nb_dim)}")
        tot_nb_dim = sum(nb_dim)

    nb_levels, nb_att, hhlevel_size, dim_sfactor = [], [], [], []
    for _ in range(tot_nb_dim):
        levels = rng.gauss_int(high.avg_nb_levels)
        nb_levels.append(levels)
        nb_att.append(tuple(rng.gauss_int(high.avg_nb_att) for _ in range(levels)))
        hhlevel_size.append(rng.gauss_int(high.avg_hhlevel_size))
        dim_sfactor.append(rng.gauss_real(high.dim_sfactor, 1))

    return LowLevelParams(
        nb_ft=nb_ft,
        tot_nb_dim=tot_nb_dim,
        nb_dim=tuple(nb_dim),
        nb_meas=tuple(nb_meas),
        density=tuple(density),
        nb_levels=tuple(nb_levels),
        nb_att=tuple(nb_att),
        hhlevel_size=tuple(hhlevel_size),
        dim_sfactor=tuple(dim_sfactor),
    )


@dataclass(frozen=True)
class WorkloadParams:
    nb_q: int = 100
    q_avg_nb_att: float = 5
    avg_nb_restr: float = 3
    prob_olap: float = 0.9
    avg_nb_aggreg: float = 3
    prob_cube: float = 0.3
    prob_having: float = 0.2
    avg_nb_dd: float = 3

    def __post_init__(self) -> None:
        if self.nb_q < 1:
            raise ParameterError(f"nb_q must be at least 1, got {self.nb_q!r}")
        _check_positive(self, "q_avg_nb_att", "avg_nb_restr", "avg_nb_aggreg", "avg_nb_dd")
        _check_probability(self, "prob_olap", "prob_cube", "prob_having")

    @property
    def prob_extract(self) -> float:
        return 1 - self.prob_olap

    @property
    def prob_rollup(self) -> float:
        return 1 - self.prob_cube


@dataclass(frozen=True)
class EtlParams:
    """Refresh rates: global, dimension share and insert share"""

    grr: float = 0.01
    drr: float = 0.05
    ir: float = 0.95

    def __post_init__(self) -> None:
        _check_probability(self, "grr", "drr", "ir")

    @property
    def frr(self) -> float:
        return 1 - self.drr

    @property
    def mr(self) -> float:
        return 1 - self.ir


class FailPolicy(str, Enum):
    ABORT = "abort"
    RECORD_AND_CONTINUE = "record-and-continue"


@dataclass(frozen=True)
class ProtocolParams:
    repn: int = 4
    fail_policy: FailPolicy = FailPolicy.ABORT

    def __post_init__(self) -> None:
        if self.repn < 0:
            raise ParameterError(f"repn must be non-negative, got {self.repn!r}")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything a benchmark run is parameterized by"""

    high: HighLevelParams = field(default_factory=HighLevelParams)
    workload: WorkloadParams = field(default_factory=WorkloadParams)
    etl: EtlParams = field(default_factory=EtlParams)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    seed: int = DEFAULT_SEED
    batch_size: int = DEFAULT_BATCH_SIZE
    max_fact_candidates: int = DEFAULT_MAX_FACT_CANDIDATES

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be at least 1, got {self.batch_size!r}")
        if self.max_fact_candidates < 1:
            raise ParameterError(f"max_fact_candidates must be at least 1, got {self.max_fact_candidates!r}")

    def describe(self) -> list[tuple[str, object]]:
        """Flat `(name, value)` listing for recaps"""
        result: list[tuple[str, object]] = []
        for group in (self.high, self.workload, self.etl, self.protocol):
            for item in fields(group):
                value = getattr(group, item.name)
                result.append((item.name, value.value if isinstance(value, Enum) else value))
        result.extend([("seed", self.seed), ("batch_size", self.batch_size)])
        return result
