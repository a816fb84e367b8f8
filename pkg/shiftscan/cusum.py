"""At-most-one-changepoint CUSUM test and Monte Carlo critical values.

CUSUM(k) = (S_k - (k/N) S_N) / (sigma_hat * sqrt(N)), with sigma_hat^2 the
sample variance under the no-changepoint null (N-1 divisor). The changepoint
estimate is the smallest k in 2..N maximizing |CUSUM(k)|.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math

import numpy as np
from tqdm import tqdm

from shiftscan.config import worker_count
from shiftscan.core import Series
from shiftscan.errors import DegenerateSeriesError, ParameterError, UnsupportedLevelError

logger = logging.getLogger(__name__)

# Asymptotic critical values of max |CUSUM| (Brownian bridge supremum).
CRITICAL_VALUES: dict[float, float] = {
    0.90: 1.224,
    0.95: 1.358,
    0.975: 1.480,
    0.99: 1.628,
}

BLOCK_SIZE = 500
_RELATIVE_VARIANCE_TOL = 1e-12
# rounding noise left in the centered values by the mean of large-offset data
_ROUNDING_TOL = 16 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class CusumProfile:
    """CUSUM(k) for k = 1..N, stored 0-based (``stats[k - 1]``)."""

    stats: np.ndarray
    sigma2_null: float
    tau_hat: int
    max_abs: float

    @property
    def n(self) -> int:
        return len(self.stats)

    def at(self, k: int) -> float:
        return float(self.stats[k - 1])


@dataclass(frozen=True)
class AmocDecision:
    reject: bool
    level: float | None
    critical_value: float
    tau_hat: int
    max_abs: float


def compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """Kahan-compensated prefix sums along the last axis."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        out = np.empty_like(values)
        total = comp = 0.0
        for i, x in enumerate(values.tolist()):
            y = x - comp
            t = total + y
            comp = (t - total) - y
            total = t
            out[i] = total
        return out

    columns = np.ascontiguousarray(np.moveaxis(values, -1, 0))
    out = np.empty_like(columns)
    total = np.zeros(columns.shape[1:])
    comp = np.zeros(columns.shape[1:])
    for i, column in enumerate(columns):
        y = column - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return np.moveaxis(out, 0, -1)


def cusum_statistics(values: np.ndarray) -> CusumProfile:
    """CUSUM profile of a raw value array (no Series validation)."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        raise ParameterError(f"CUSUM needs at least 2 observations, got {n}")

    mean = math.fsum(x.tolist()) / n
    centered = x - mean
    sigma2 = math.fsum((centered * centered).tolist()) / (n - 1)
    tol = max(
        _RELATIVE_VARIANCE_TOL * float(np.max(np.abs(centered))),
        _ROUNDING_TOL * float(np.max(np.abs(x))),
    )
    if sigma2 <= tol * tol:
        raise DegenerateSeriesError("series has zero sample variance")

    # S_k - (k/N) S_N is the prefix sum of the centered values.
    stats = compensated_cumsum(centered) / (math.sqrt(sigma2) * math.sqrt(n))
    stats[-1] = 0.0
    abs_stats = np.abs(stats[1:])
    tau_hat = int(np.argmax(abs_stats)) + 2
    return CusumProfile(stats, sigma2, tau_hat, float(abs_stats[tau_hat - 2]))


def cusum_profile(series: Series) -> CusumProfile:
    return cusum_statistics(series.values)


def critical_value_for(level: float) -> float:
    for tabulated, value in CRITICAL_VALUES.items():
        if math.isclose(level, tabulated, abs_tol=1e-9):
            return value
    raise UnsupportedLevelError(
        f"no tabulated CUSUM critical value for level {level}; "
        f"choose one of {sorted(CRITICAL_VALUES)} or supply a simulated value"
    )


def amoc_test(
    series: Series, level: float = 0.95, critical_value: float | None = None
) -> AmocDecision:
    """Reject the no-changepoint null when max |CUSUM| exceeds the critical value.

    ``critical_value`` overrides the table, e.g. with a value from
    ``simulate_critical_values`` for an untabulated level.
    """
    threshold = critical_value if critical_value is not None else critical_value_for(level)
    profile = cusum_profile(series)
    return AmocDecision(
        reject=profile.max_abs > threshold,
        level=level,
        critical_value=threshold,
        tau_hat=profile.tau_hat,
        max_abs=profile.max_abs,
    )


def _block_maxima(n: int, size: int, seed: int, block: int) -> np.ndarray:
    rng = np.random.default_rng([seed, block])
    x = rng.standard_normal((size, n))
    centered = x - x.mean(axis=1, keepdims=True)
    sigma = np.sqrt(np.einsum("ij,ij->i", centered, centered) / (n - 1))
    prefix = compensated_cumsum(centered)
    return np.max(np.abs(prefix[:, 1:]), axis=1) / (sigma * math.sqrt(n))


def simulate_critical_values(
    n: int = 2000,
    reps: int = 100_000,
    levels: Sequence[float] = tuple(CRITICAL_VALUES),
    seed: int = 0,
    workers: int | None = None,
    progress: bool = False,
) -> dict[float, float]:
    """Empirical quantiles of max |CUSUM| over i.i.d. standard normal series.

    Replicates are drawn in fixed blocks of ``BLOCK_SIZE``; block ``b`` uses the
    stream seeded by ``(seed, b)``, so the table depends only on
    ``(n, reps, seed)`` and never on the worker count.
    """
    if n < 100:
        raise ParameterError(f"n must be >= 100, got {n}")
    if reps < 100:
        raise ParameterError(f"reps must be >= 100, got {reps}")
    levels = [float(level) for level in levels]
    if not levels or any(not 0 < level < 1 for level in levels):
        raise ParameterError(f"levels must lie in (0, 1), got {levels}")
    if reps < 1000:
        logger.warning("Only %d replicates; tail quantiles will be noisy", reps)

    sizes = [BLOCK_SIZE] * (reps // BLOCK_SIZE)
    if reps % BLOCK_SIZE:
        sizes.append(reps % BLOCK_SIZE)
    workers = workers or worker_count()
    logger.info(
        "Simulating %d replicates of length %d in %d blocks (%d workers)",
        reps, n, len(sizes), workers,
    )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        maxima = list(
            tqdm(
                pool.map(lambda b: _block_maxima(n, sizes[b], seed, b), range(len(sizes))),
                total=len(sizes),
                desc="critvals",
                unit="block",
                disable=not progress,
            )
        )
    quantiles = np.quantile(np.concatenate(maxima), levels)
    return {level: float(q) for level, q in zip(levels, quantiles, strict=True)}
