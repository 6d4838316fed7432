"""Pytest fixtures shared by the test suite; enabled with `pytest_plugins = ["warebench.testing"]`"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

try:
    import pytest
    import yaml
except ModuleNotFoundError as exc:
    raise ModuleNotFoundError(
        "this file requires optional dependencies, please install using: warebench[testing]",
    ) from exc

from warebench.backend import IN_MEMORY, Backend, BackendConfig
from warebench.config import parse_config
from warebench.datagen import load_warehouse
from warebench.model import WarehouseSchema
from warebench.params import BenchmarkConfig, HighLevelParams, ProtocolParams, WorkloadParams, derive_low_level
from warebench.randomizer import SeededRng
from warebench.schema import build_schema, emit_ddl

DATA_DIRECTORY_NAME = "data"

# Two small dimensions, a few hundred fact candidates
TINY_CONFIG = BenchmarkConfig(
    high=HighLevelParams(
        avg_nb_ft=1,
        avg_nb_dim=2,
        avg_tot_nb_dim=2,
        avg_nb_meas=2,
        avg_density=0.5,
        avg_nb_levels=2,
        avg_nb_att=2,
        avg_hhlevel_size=4,
        dim_sfactor=3,
        sigma_ratio=0,
    ),
    workload=WorkloadParams(nb_q=10),
    protocol=ProtocolParams(repn=1),
    batch_size=50,
)


@pytest.fixture(scope="module")
def build_data_file_full_path(request):
    def path_builder(file_path: Path) -> Path:
        test_module_name = Path(request.fspath).stem
        return Path(request.fspath).parent / DATA_DIRECTORY_NAME / test_module_name / file_path

    return path_builder


@pytest.fixture(scope="module")
def load_file(build_data_file_full_path):
    def loader(file_path: Path):
        full_file_path = build_data_file_full_path(file_path)
        ext = full_file_path.suffix
        if ext == ".yaml":
            with full_file_path.open("r") as f:
                return yaml.safe_load(f)
        elif ext == ".conf":
            return parse_config(full_file_path.read_text())
        elif ext in (".txt", ".sql", ".csv"):
            return full_file_path.read_text()
        else:
            raise ValueError(f"Unknown file type: {ext=}")

    return loader


@pytest.fixture
def tiny_config() -> BenchmarkConfig:
    return TINY_CONFIG


@pytest.fixture
def sqlite_backend():
    with Backend(BackendConfig(IN_MEMORY)) as backend:
        yield backend


class TinyWarehouse(NamedTuple):
    config: BenchmarkConfig
    rng: SeededRng
    schema: WarehouseSchema


def build_tiny_warehouse(config: BenchmarkConfig = TINY_CONFIG) -> TinyWarehouse:
    rng = SeededRng(config.seed, sigma_ratio=config.high.sigma_ratio)
    low = derive_low_level(config.high, rng.spawn("low-level"))
    return TinyWarehouse(config, rng, build_schema(low, rng.spawn("schema")))


@pytest.fixture
def tiny_warehouse() -> TinyWarehouse:
    return build_tiny_warehouse()


@pytest.fixture
def loaded_backend(sqlite_backend, tiny_warehouse):
    """In-memory database holding the tiny warehouse"""
    sqlite_backend.execute_ddl(emit_ddl(tiny_warehouse.schema, sqlite_backend.dialect))
    load_warehouse(tiny_warehouse.schema, tiny_warehouse.rng, sqlite_backend, batch_size=TINY_CONFIG.batch_size)
    return sqlite_backend
