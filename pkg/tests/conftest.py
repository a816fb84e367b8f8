"""Pytest configuration and shared fixtures."""

import pathlib
import sys
import tempfile
from typing import Any

import pytest
import yaml

# Add project root (shiftscan package and shiftctl.py) to path
sys.path.insert(0, str(pathlib.Path(__file__).parent.parent))

from shiftscan.core import Series, SeriesKind  # noqa: E402


@pytest.fixture
def temp_dir():
    """Provide a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield pathlib.Path(tmpdir)


@pytest.fixture
def test_data_dir():
    """Provide the test data directory path."""
    return pathlib.Path(__file__).parent / "data"


@pytest.fixture
def valid_minimal_settings(test_data_dir):
    return yaml.safe_load((test_data_dir / "valid_minimal_settings.yml").read_text())


@pytest.fixture
def valid_full_settings(test_data_dir):
    return yaml.safe_load((test_data_dir / "valid_full_settings.yml").read_text())


@pytest.fixture
def invalid_settings(test_data_dir):
    return yaml.safe_load((test_data_dir / "invalid_settings.yml").read_text())


@pytest.fixture
def write_config_file(temp_dir):
    """Factory to write settings data to a temporary YAML file."""

    def _write_config(
        config_data: dict[str, Any], filename: str = "shiftscan.yml"
    ) -> pathlib.Path:
        config_path = temp_dir / filename
        config_path.write_text(yaml.dump(config_data))
        return config_path

    return _write_config


@pytest.fixture
def write_csv(temp_dir):
    """Factory to write a ``time,value`` CSV (or raw text) to a temporary file."""

    def _write_csv(
        rows: list[tuple[Any, Any]] | str,
        filename: str = "series.csv",
        header: str | None = "time,value",
    ) -> pathlib.Path:
        path = temp_dir / filename
        if isinstance(rows, str):
            path.write_text(rows)
            return path
        lines = [header] if header else []
        lines += [f"{t},{v}" for t, v in rows]
        path.write_text("\n".join(lines) + "\n")
        return path

    return _write_csv


@pytest.fixture
def two_step_series():
    """[1,1,1,5,5,5]: the hand-computable CUSUM example."""
    return Series.from_values([1, 1, 1, 5, 5, 5])


@pytest.fixture
def step_counts():
    """Noise-free counts: 26 fives then 27 tens."""
    return Series.from_values([5] * 26 + [10] * 27, kind=SeriesKind.COUNT)


@pytest.fixture
def no_threads_env(monkeypatch):
    monkeypatch.delenv("SHIFTSCAN_THREADS", raising=False)
