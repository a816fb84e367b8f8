"""YAML settings file: loading, validation and worker-count resolution.

A settings file holds per-operation defaults::

    threads: 4
    critvals: {n: 2000, reps: 100000, levels: [0.9, 0.95], seed: 0}
    binseg:   {level: 0.95, min_len: 3}
    wbs:      {intervals: 500, threshold: 1.358, min_len: 3, seed: 0}
    exhaustive: {max_n: 24}
    ga: {population_size: 100, max_generations: 500, stagnation_limit: 50,
         crossover_rate: 0.9, mutation_rate: null, elitism_count: 2, seed: 0}

Command-line flags override file values, which override built-in defaults.
"""

from __future__ import annotations

import logging
import math
import os
import pathlib
from typing import Any

import yaml

from shiftscan.errors import SettingsError

logger = logging.getLogger(__name__)

THREADS_ENV = "SHIFTSCAN_THREADS"


def _int_at_least(low: int):
    def check(value: Any) -> str | None:
        if isinstance(value, bool) or not isinstance(value, int) or value < low:
            return f"must be an integer >= {low}"
        return None

    return check


def _real_between(low: float, high: float):
    def check(value: Any) -> str | None:
        if isinstance(value, bool) or not isinstance(value, int | float):
            return "must be a number"
        if value > high or value < low:
            return f"must lie in [{low}, {high}]"
        return None

    return check


def _positive_real(value: Any) -> str | None:
    if isinstance(value, bool) or not isinstance(value, int | float) or value <= 0:
        return "must be a positive number"
    return None


def _any_int(value: Any) -> str | None:
    if isinstance(value, bool) or not isinstance(value, int):
        return "must be an integer"
    return None


def _level_list(value: Any) -> str | None:
    if not isinstance(value, list) or not value:
        return "must be a non-empty list of levels"
    for item in value:
        if isinstance(item, bool) or not isinstance(item, int | float) or not 0 < item < 1:
            return f"contains {item!r}; levels must lie in (0, 1)"
    return None


def _tabulated_level(value: Any) -> str | None:
    from shiftscan.cusum import CRITICAL_VALUES  # cusum imports this module

    if isinstance(value, bool) or not isinstance(value, int | float):
        return "must be a number"
    if not any(math.isclose(value, level, abs_tol=1e-9) for level in CRITICAL_VALUES):
        return "must be one of " + ", ".join(str(level) for level in CRITICAL_VALUES)
    return None


def _optional(check):
    def wrapped(value: Any) -> str | None:
        return None if value is None else check(value)

    return wrapped


SCHEMA: dict[str, dict[str, Any]] = {
    "critvals": {
        "n": _int_at_least(100),
        "reps": _int_at_least(100),
        "levels": _level_list,
        "seed": _any_int,
    },
    "binseg": {
        "level": _tabulated_level,
        "min_len": _int_at_least(2),
    },
    "wbs": {
        "intervals": _int_at_least(0),
        "threshold": _positive_real,
        "min_len": _int_at_least(2),
        "seed": _any_int,
    },
    "exhaustive": {
        "max_n": _int_at_least(2),
    },
    "ga": {
        "population_size": _int_at_least(2),
        "max_generations": _int_at_least(1),
        "stagnation_limit": _int_at_least(1),
        "crossover_rate": _real_between(0.0, 1.0),
        "mutation_rate": _optional(_real_between(0.0, 1.0)),
        "elitism_count": _int_at_least(0),
        "seed": _any_int,
    },
}


def validate_settings(data: Any) -> list[str]:
    """Return every problem found in a parsed settings mapping."""
    errors: list[str] = []
    if data is None:
        return errors
    if not isinstance(data, dict):
        return ["settings file must contain a mapping"]

    for key in data:
        if key != "threads" and key not in SCHEMA:
            errors.append(f"Unknown top-level key: {key}")

    if "threads" in data:
        problem = _int_at_least(1)(data["threads"])
        if problem:
            errors.append(f"threads {problem}")

    for section, fields in SCHEMA.items():
        body = data.get(section)
        if body is None:
            continue
        if not isinstance(body, dict):
            errors.append(f"{section} section must be a mapping")
            continue
        for key, value in body.items():
            check = fields.get(key)
            if check is None:
                errors.append(f"{section}: unknown key {key}")
                continue
            problem = check(value)
            if problem:
                errors.append(f"{section}.{key} {problem}")

    if isinstance(data.get("ga"), dict):
        ga = data["ga"]
        pop, elite = ga.get("population_size"), ga.get("elitism_count")
        if isinstance(pop, int) and isinstance(elite, int) and elite > pop:
            errors.append("ga.elitism_count cannot exceed ga.population_size")

    return errors


def read_settings_file(path: str | os.PathLike) -> Any:
    """Parse a YAML settings file without validating it."""
    config_path = pathlib.Path(path)
    if not config_path.is_file():
        raise SettingsError(f"Settings file not found: {config_path}")
    try:
        return yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise SettingsError(f"YAML parsing error: {exc}") from exc


def load_settings(path: str | os.PathLike | None) -> dict[str, Any]:
    """Load and validate a settings file; ``None`` yields empty settings."""
    if path is None:
        return {}
    data = read_settings_file(path)
    errors = validate_settings(data)
    if errors:
        raise SettingsError(
            "Settings validation failed:\n" + "\n".join(f"  - {e}" for e in errors)
        )
    logger.debug("Loaded settings from %s", path)
    return data


def section(settings: dict[str, Any], name: str) -> dict[str, Any]:
    return dict(settings.get(name) or {})


def worker_count(settings: dict[str, Any] | None = None) -> int:
    """Threads available to Monte Carlo and GA pools.

    ``SHIFTSCAN_THREADS`` wins over the settings file; otherwise the CPU count.
    """
    raw = os.getenv(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise SettingsError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if settings and settings.get("threads"):
        return max(1, int(settings["threads"]))
    return max(1, os.cpu_count() or 1)
