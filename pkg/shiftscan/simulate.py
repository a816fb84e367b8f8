"""Synthetic series from the mean-shift models, for tests and demos."""

from __future__ import annotations

from collections.abc import Sequence
import math

import numpy as np

from shiftscan.core import ChangepointConfiguration, Series, SeriesKind, partition
from shiftscan.errors import ParameterError
from shiftscan.models import PHI_BOUND, SegmentModelKind


def regime_levels(
    n: int, taus: Sequence[int], levels: Sequence[float]
) -> np.ndarray:
    """Piecewise-constant mean with ``levels[i]`` on regime i."""
    config = ChangepointConfiguration(tuple(taus))
    if len(levels) != config.m + 1:
        raise ParameterError(
            f"{config.m} changepoints need {config.m + 1} regime levels, got {len(levels)}"
        )
    return np.asarray(levels, dtype=float)[partition(config, n).labels()]


def ar1_noise(n: int, phi: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) errors eps_t = phi * eps_{t-1} + Z_t, Z_t ~ N(0, sigma^2)."""
    if abs(phi) > PHI_BOUND:
        raise ParameterError(f"|phi| must not exceed {PHI_BOUND}, got {phi}")
    z = rng.normal(0.0, sigma, size=n)
    eps = np.empty(n)
    eps[0] = z[0] / math.sqrt(1.0 - phi * phi)
    for t in range(1, n):
        eps[t] = phi * eps[t - 1] + z[t]
    return eps


def simulate_series(
    model: SegmentModelKind | str,
    n: int,
    taus: Sequence[int] = (),
    levels: Sequence[float] = (0.0,),
    beta: float = 0.0,
    phi: float = 0.0,
    sigma: float = 1.0,
    seed: int = 0,
    start_time: int = 1,
) -> Series:
    """Draw one series; ``levels`` are regime means (Gaussian) or rates (poisson)."""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if sigma < 0:
        raise ParameterError(f"sigma must be nonnegative, got {sigma}")
    model = SegmentModelKind(model)
    rng = np.random.default_rng(seed)
    mu = regime_levels(n, taus, levels)
    times = np.arange(start_time, start_time + n)

    if model is SegmentModelKind.POISSON:
        if np.any(mu < 0):
            raise ParameterError("poisson rates must be nonnegative")
        return Series(rng.poisson(mu).astype(float), times, SeriesKind.COUNT)

    if model is SegmentModelKind.GAUSS_TREND_AR1:
        mu = mu + beta * np.arange(1, n + 1)
        noise = ar1_noise(n, phi, sigma, rng)
    else:
        noise = rng.normal(0.0, sigma, size=n)
    return Series(mu + noise, times, SeriesKind.CONTINUOUS)
