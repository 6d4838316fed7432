"""Synthetic data warehouse benchmark: schema, data, workload and refresh generation with a timing protocol"""

from __future__ import annotations

from .backend import Backend, BackendConfig, connect
from .config import load_config, load_low_level, parse_config
from .datagen import export_csv, load_warehouse
from .errors import WarebenchError
from .etl import execute_refresh, plan_refresh
from .harness import read_csv, run_load_test, run_performance_test, summarize, write_csv
from .logging import setup_logging
from .params import BenchmarkConfig, EtlParams, HighLevelParams, LowLevelParams, WorkloadParams, derive_low_level
from .randomizer import SeededRng
from .schema import build_schema, emit_ddl
from .sizing import estimate_size
from .timing import Timer
from .workload import generate_workload, load_workload, save_workload

__version__ = "0.1.0"
