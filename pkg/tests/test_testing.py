from pathlib import Path

import pytest

from warebench.params import BenchmarkConfig


def test_build_data_file_full_path(build_data_file_full_path):
    assert build_data_file_full_path("test.yaml") == Path(__file__).parent / "data" / "test_testing" / "test.yaml"


@pytest.mark.parametrize(
    ("filename", "expected"),
    [("test.yaml", {"foo": "yaml"}), ("test.txt", "foo text\n")],
)
def test_load_file(load_file, filename: str, expected: dict | str):
    assert load_file(filename) == expected


def test_load_conf_file(load_file):
    config = load_file("test.conf")
    assert isinstance(config, BenchmarkConfig)
    assert config.workload.nb_q == 7


def test_load_file_unknown_extension(load_file):
    with pytest.raises(ValueError, match="Unknown file type"):
        load_file("test.pkl")


def test_tiny_config(tiny_config):
    assert tiny_config.high.sigma_ratio == 0


def test_sqlite_backend(sqlite_backend):
    assert sqlite_backend.scalar("SELECT 1") == 1
    assert sqlite_backend.dialect.name == "sqlite"
