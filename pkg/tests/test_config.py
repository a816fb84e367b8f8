"""Pytest-based tests for settings loading and validation."""

import pathlib
import subprocess
import sys

import pytest

from shiftscan.config import (
    THREADS_ENV,
    load_settings,
    read_settings_file,
    section,
    validate_settings,
    worker_count,
)
from shiftscan.errors import SettingsError


class TestValidateSettings:
    """Validation of parsed settings mappings."""

    def test_valid_minimal_settings(self, valid_minimal_settings):
        assert validate_settings(valid_minimal_settings) == []

    def test_valid_full_settings(self, valid_full_settings):
        assert validate_settings(valid_full_settings) == []

    def test_empty_file_is_valid(self):
        assert validate_settings(None) == []

    def test_invalid_settings_report_every_problem(self, invalid_settings):
        errors = validate_settings(invalid_settings)

        assert "Unknown top-level key: plotting" in errors
        assert "threads must be an integer >= 1" in errors
        assert "critvals.reps must be an integer >= 100" in errors
        assert any(e.startswith("critvals.levels contains 1.5") for e in errors)
        assert "binseg.level must be one of 0.9, 0.95, 0.975, 0.99" in errors
        assert "binseg.min_len must be an integer >= 2" in errors
        assert "wbs.threshold must be a positive number" in errors
        assert "wbs: unknown key colour" in errors
        assert "ga.crossover_rate must lie in [0.0, 1.0]" in errors
        assert "ga.elitism_count cannot exceed ga.population_size" in errors

    def test_section_must_be_mapping(self):
        assert validate_settings({"ga": [1, 2]}) == ["ga section must be a mapping"]

    def test_top_level_must_be_mapping(self):
        assert validate_settings(["a"]) == ["settings file must contain a mapping"]

    def test_booleans_are_not_integers(self):
        assert validate_settings({"wbs": {"intervals": True}}) == [
            "wbs.intervals must be an integer >= 0"
        ]

    def test_null_mutation_rate_is_allowed(self):
        assert validate_settings({"ga": {"mutation_rate": None}}) == []

    def test_binseg_level_must_be_tabulated(self):
        assert validate_settings({"binseg": {"level": 0.8}}) == [
            "binseg.level must be one of 0.9, 0.95, 0.975, 0.99"
        ]
        assert validate_settings({"binseg": {"level": 0.975}}) == []


class TestLoadSettings:
    def test_none_gives_empty_settings(self):
        assert load_settings(None) == {}

    def test_loads_valid_file(self, write_config_file):
        path = write_config_file({"ga": {"seed": 4}})
        settings = load_settings(path)
        assert section(settings, "ga") == {"seed": 4}
        assert section(settings, "wbs") == {}

    def test_section_is_a_copy(self, write_config_file):
        settings = load_settings(write_config_file({"ga": {"seed": 4}}))
        section(settings, "ga")["seed"] = 99
        assert settings["ga"]["seed"] == 4

    def test_invalid_file_raises(self, test_data_dir):
        with pytest.raises(SettingsError, match="validation failed"):
            load_settings(test_data_dir / "invalid_settings.yml")

    def test_missing_file(self, temp_dir):
        with pytest.raises(SettingsError, match="not found"):
            read_settings_file(temp_dir / "does_not_exist.yml")

    def test_malformed_yaml(self, temp_dir):
        path = temp_dir / "broken.yml"
        path.write_text("invalid: yaml: content: [")
        with pytest.raises(SettingsError, match="YAML parsing error"):
            read_settings_file(path)

    def test_example_file_is_valid(self):
        example = pathlib.Path(__file__).parent.parent / "shiftscan.example.yml"
        assert validate_settings(read_settings_file(example)) == []


class TestWorkerCount:
    def test_environment_wins(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert worker_count({"threads": 8}) == 3

    def test_settings_then_cpu_count(self, no_threads_env, mocker):
        assert worker_count({"threads": 5}) == 5
        mocker.patch("os.cpu_count", return_value=6)
        assert worker_count({}) == 6

    def test_at_least_one(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "0")
        assert worker_count() == 1

    def test_garbage_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(SettingsError):
            worker_count()


class TestValidateCommand:
    """Run ``shiftctl validate`` the way users do."""

    @pytest.fixture
    def shiftctl(self):
        return pathlib.Path(__file__).parent.parent / "shiftctl.py"

    def run_validator(self, shiftctl, config_path):
        result = subprocess.run(
            [sys.executable, str(shiftctl), "validate", "--config", str(config_path)],
            capture_output=True,
            text=True,
        )
        return result.returncode, result.stdout, result.stderr

    def test_valid(self, shiftctl, valid_minimal_settings, write_config_file):
        exit_code, stdout, _ = self.run_validator(
            shiftctl, write_config_file(valid_minimal_settings)
        )
        assert exit_code == 0
        assert "passed validation" in stdout

    def test_unknown_section_key(self, shiftctl, write_config_file):
        path = write_config_file({"binseg": {"unknown_field": 1}})
        exit_code, stdout, _ = self.run_validator(shiftctl, path)
        assert exit_code == 1
        assert "binseg: unknown key unknown_field" in stdout

    def test_malformed_yaml(self, shiftctl, temp_dir):
        path = temp_dir / "invalid.yml"
        path.write_text("invalid: yaml: content: [")
        exit_code, _, stderr = self.run_validator(shiftctl, path)
        assert exit_code == 2
        assert "YAML parsing error" in stderr

    def test_untabulated_level_fails_validation(self, shiftctl, write_config_file):
        path = write_config_file({"binseg": {"level": 0.8}})
        exit_code, stdout, _ = self.run_validator(shiftctl, path)
        assert exit_code == 1
        assert "binseg.level must be one of" in stdout
