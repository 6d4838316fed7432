"""
Benchmark configuration files.

Parameters live in a flat `KEY=value` file using the uppercase parameter names,
e.g. `AVG_DENSITY=0.6`; `#` starts a comment. Full low-level parameters can be given in a YAML file.
"""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path
from typing import Any, NamedTuple

import yaml

from warebench.errors import ConfigError, ParameterError
from warebench.params import (
    BenchmarkConfig,
    EtlParams,
    HighLevelParams,
    LowLevelParams,
    ProtocolParams,
    WorkloadParams,
    validate_params,
)

LOGGER = logging.getLogger(__name__)


class ConfigKey(NamedTuple):
    group: str  # attribute of `BenchmarkConfig`, empty for top-level values
    field: str
    value_type: type


CONFIG_KEYS: dict[str, ConfigKey] = {
    "NB_FT": ConfigKey("high", "avg_nb_ft", float),
    "AVG_NB_DIM": ConfigKey("high", "avg_nb_dim", float),
    "AVG_TOT_NB_DIM": ConfigKey("high", "avg_tot_nb_dim", float),
    "AVG_NB_MEAS": ConfigKey("high", "avg_nb_meas", float),
    "AVG_DENSITY": ConfigKey("high", "avg_density", float),
    "AVG_NB_LEVELS": ConfigKey("high", "avg_nb_levels", float),
    "AVG_NB_ATT": ConfigKey("high", "avg_nb_att", float),
    "AVG_HHLEVEL_SIZE": ConfigKey("high", "avg_hhlevel_size", float),
    "DIM_SFACTOR": ConfigKey("high", "dim_sfactor", float),
    "SIGMA_RATIO": ConfigKey("high", "sigma_ratio", float),
    "NB_Q": ConfigKey("workload", "nb_q", int),
    "Q_AVG_NB_ATT": ConfigKey("workload", "q_avg_nb_att", float),
    "AVG_NB_RESTR": ConfigKey("workload", "avg_nb_restr", float),
    "PROB_OLAP": ConfigKey("workload", "prob_olap", float),
    "AVG_NB_AGGREG": ConfigKey("workload", "avg_nb_aggreg", float),
    "PROB_CUBE": ConfigKey("workload", "prob_cube", float),
    "PROB_HAVING": ConfigKey("workload", "prob_having", float),
    "AVG_NB_DD": ConfigKey("workload", "avg_nb_dd", float),
    "GRR": ConfigKey("etl", "grr", float),
    "DRR": ConfigKey("etl", "drr", float),
    "IR": ConfigKey("etl", "ir", float),
    "REPN": ConfigKey("protocol", "repn", int),
    "SEED": ConfigKey("", "seed", int),
    "BATCH_SIZE": ConfigKey("", "batch_size", int),
    "MAX_FACT_CANDIDATES": ConfigKey("", "max_fact_candidates", int),
}
KEY_ALIASES = {"AVG_NB_FT": "NB_FT"}
DERIVED_KEYS = frozenset(("PROB_EXTRACT", "PROB_ROLLUP", "FRR", "MR"))

GROUP_TYPES: dict[str, type] = {
    "high": HighLevelParams,
    "workload": WorkloadParams,
    "etl": EtlParams,
    "protocol": ProtocolParams,
}

LOW_LEVEL_KEYS = (
    "NB_FT",
    "TOT_NB_DIM",
    "NB_DIM",
    "NB_MEAS",
    "DENSITY",
    "NB_LEVELS",
    "NB_ATT",
    "HHLEVEL_SIZE",
    "DIM_SFACTOR",
)


def parse_config(text: str, base: BenchmarkConfig = None) -> BenchmarkConfig:
    """
    Parse `KEY=value` lines on top of `base` (defaults when omitted).

    >>> parse_config("NB_Q=10\\nGRR=0  # no refresh").workload.nb_q
    10
    """
    values: dict[str, dict[str, Any]] = {group: {} for group in (*GROUP_TYPES, "")}
    seen: dict[str, int] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().upper(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {line_number}: expected KEY=value, got {raw_line.strip()!r}")
        key = KEY_ALIASES.get(key, key)
        if key in DERIVED_KEYS:
            raise ConfigError(f"line {line_number}: {key} is derived from other parameters and can't be set")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {line_number}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {line_number}: {key} already set on line {seen[key]}")
        seen[key] = line_number
        config_key = CONFIG_KEYS[key]
        try:
            values[config_key.group][config_key.field] = config_key.value_type(value)
        except ValueError as exc:
            raise ConfigError(
                f"line {line_number}: {key} expects {config_key.value_type.__name__}, got {value!r}",
            ) from exc

    base = base or BenchmarkConfig()
    try:
        groups = {
            group: dataclasses.replace(getattr(base, group), **values[group]) for group in GROUP_TYPES if values[group]
        }
        return dataclasses.replace(base, **groups, **values[""])
    except ParameterError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParameterError(str(exc)) from exc


def load_config(path: Path) -> BenchmarkConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"Can't read config file {path}: {exc}") from exc
    LOGGER.debug(f"Loading config from {path}")
    return parse_config(text)


def dump_config(config: BenchmarkConfig) -> str:
    """Canonical `KEY=value` text; `parse_config` of it gives back `config`"""
    lines = []
    for key, config_key in CONFIG_KEYS.items():
        owner = getattr(config, config_key.group) if config_key.group else config
        lines.append(f"{key}={config_key.value_type(getattr(owner, config_key.field))!r}")
    return "\n".join(lines) + "\n"


def parse_low_level(data: dict[str, Any]) -> LowLevelParams:
    if not isinstance(data, dict):
        raise ConfigError(f"Low-level parameters must be a mapping, got {type(data).__name__}")
    data = {str(key).upper(): value for key, value in data.items()}
    missing = [key for key in LOW_LEVEL_KEYS if key not in data]
    if missing:
        raise ConfigError(f"Missing low-level parameters: {', '.join(missing)}")
    unknown = sorted(set(data) - set(LOW_LEVEL_KEYS))
    if unknown:
        raise ConfigError(f"Unknown low-level parameters: {', '.join(unknown)}")
    try:
        low = LowLevelParams(
            nb_ft=int(data["NB_FT"]),
            tot_nb_dim=int(data["TOT_NB_DIM"]),
            nb_dim=[int(value) for value in data["NB_DIM"]],
            nb_meas=[int(value) for value in data["NB_MEAS"]],
            density=[float(value) for value in data["DENSITY"]],
            nb_levels=[int(value) for value in data["NB_LEVELS"]],
            nb_att=[[int(value) for value in row] for row in data["NB_ATT"]],
            hhlevel_size=[int(value) for value in data["HHLEVEL_SIZE"]],
            dim_sfactor=[float(value) for value in data["DIM_SFACTOR"]],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Malformed low-level parameters: {exc}") from exc
    report = validate_params(low)
    if not report.ok:
        raise ParameterError(f"Invalid low-level parameters: {report}")
    return low


def load_low_level(path: Path) -> LowLevelParams:
    path = Path(path)
    try:
        with path.open() as f:
            data = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"Can't read low-level parameter file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Malformed low-level parameter file {path}: {exc}") from exc
    return parse_low_level(data)


def dump_low_level(low: LowLevelParams) -> str:
    data = {
        "NB_FT": low.nb_ft,
        "TOT_NB_DIM": low.tot_nb_dim,
        "NB_DIM": list(low.nb_dim),
        "NB_MEAS": list(low.nb_meas),
        "DENSITY": list(low.density),
        "NB_LEVELS": list(low.nb_levels),
        "NB_ATT": [list(row) for row in low.nb_att],
        "HHLEVEL_SIZE": list(low.hhlevel_size),
        "DIM_SFACTOR": list(low.dim_sfactor),
    }
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)
