"""Binary segmentation and wild binary segmentation on top of the CUSUM test."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
import logging

import numpy as np

from shiftscan.core import ChangepointConfiguration, Series
from shiftscan.cusum import CRITICAL_VALUES, CusumProfile, critical_value_for, cusum_statistics
from shiftscan.errors import DegenerateSeriesError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_MIN_LEN = 3
DEFAULT_WBS_THRESHOLD = CRITICAL_VALUES[0.95]


class Decision(StrEnum):
    SPLIT = "split"
    NO_CHANGE = "no-change"
    TOO_SHORT = "too-short"
    DEGENERATE = "degenerate"


class IntervalSource(StrEnum):
    RANDOM = "random"
    FULL = "full"


@dataclass(frozen=True)
class IntervalDraw:
    start: int
    end: int
    source: IntervalSource = IntervalSource.RANDOM


@dataclass(frozen=True)
class TraceEntry:
    start: int
    end: int
    statistic: float | None
    threshold: float
    decision: Decision
    tau: int | None = None
    interval: tuple[int, int] | None = None


@dataclass
class SegmentationTrace:
    """Ordered log of every working segment examined."""

    entries: list[TraceEntry] = field(default_factory=list)

    def record(self, entry: TraceEntry) -> None:
        logger.debug(
            "segment %d..%d: %s (stat=%s, tau=%s)",
            entry.start, entry.end, entry.decision, entry.statistic, entry.tau,
        )
        self.entries.append(entry)

    @property
    def flagged(self) -> list[int]:
        return [e.tau for e in self.entries if e.decision is Decision.SPLIT]

    def __len__(self) -> int:
        return len(self.entries)


class _IntervalStats:
    """Memoized CUSUM profiles of 1-based inclusive sub-intervals."""

    def __init__(self, values: np.ndarray):
        self.values = values
        self._cache: dict[tuple[int, int], CusumProfile | None] = {}

    def __call__(self, start: int, end: int) -> CusumProfile | None:
        key = (start, end)
        if key not in self._cache:
            try:
                self._cache[key] = cusum_statistics(self.values[start - 1 : end])
            except DegenerateSeriesError:
                self._cache[key] = None
        return self._cache[key]


def _check_min_len(min_len: int) -> None:
    if min_len < 2:
        raise ParameterError(f"min_len must be >= 2, got {min_len}")


def binary_segmentation(
    series: Series, level: float = 0.95, min_len: int = DEFAULT_MIN_LEN
) -> tuple[ChangepointConfiguration, SegmentationTrace]:
    """Recursively split at CUSUM changepoints while the AMOC test rejects.

    Segments shorter than ``min_len`` and constant segments are declared
    changepoint free. Subsegments reuse the asymptotic critical value.
    """
    _check_min_len(min_len)
    threshold = critical_value_for(level)
    return _segment(series, threshold, min_len, draws=())


def draw_intervals(
    n: int, num_intervals: int, min_len: int, rng: np.random.Generator
) -> list[IntervalDraw]:
    """Uniform draws, with replacement, over pairs with end - start + 1 >= min_len."""
    draws: list[IntervalDraw] = []
    if n < min_len:
        return draws
    while len(draws) < num_intervals:
        start, end = (int(v) for v in rng.integers(1, n + 1, size=2))
        if end - start + 1 >= min_len:
            draws.append(IntervalDraw(start, end))
    return draws


def wild_binary_segmentation(
    series: Series,
    num_intervals: int = 500,
    threshold: float = DEFAULT_WBS_THRESHOLD,
    min_len: int = DEFAULT_MIN_LEN,
    seed: int = 0,
) -> tuple[ChangepointConfiguration, SegmentationTrace]:
    """Binary segmentation maximizing |CUSUM| over random sub-intervals.

    Within each working segment, the candidate set is the segment itself plus
    every drawn interval it fully contains; the largest statistic wins. With
    ``num_intervals=0`` this is binary segmentation at ``threshold``.
    """
    _check_min_len(min_len)
    if num_intervals < 0:
        raise ParameterError(f"num_intervals must be >= 0, got {num_intervals}")
    if threshold <= 0:
        raise ParameterError(f"threshold must be positive, got {threshold}")
    rng = np.random.default_rng(seed)
    draws = draw_intervals(series.n, num_intervals, min_len, rng)
    return _segment(series, threshold, min_len, draws=tuple(draws))


def _segment(
    series: Series, threshold: float, min_len: int, draws: tuple[IntervalDraw, ...]
) -> tuple[ChangepointConfiguration, SegmentationTrace]:
    stats = _IntervalStats(series.values)
    trace = SegmentationTrace()
    taus: list[int] = []
    stack = [(1, series.n)]

    while stack:
        start, end = stack.pop()
        if end - start + 1 < min_len:
            trace.record(TraceEntry(start, end, None, threshold, Decision.TOO_SHORT))
            continue

        candidates = [IntervalDraw(start, end, IntervalSource.FULL)]
        candidates += [d for d in draws if start <= d.start and d.end <= end]
        best: tuple[float, int, IntervalDraw] | None = None
        for interval in candidates:
            profile = stats(interval.start, interval.end)
            if profile is None:
                continue
            if best is None or profile.max_abs > best[0]:
                best = (profile.max_abs, interval.start - 1 + profile.tau_hat, interval)

        if best is None:
            trace.record(TraceEntry(start, end, None, threshold, Decision.DEGENERATE))
            continue
        statistic, tau, interval = best
        if statistic > threshold and tau < end:
            trace.record(
                TraceEntry(
                    start, end, statistic, threshold, Decision.SPLIT, tau,
                    (interval.start, interval.end),
                )
            )
            taus.append(tau)
            # right pushed first so the left half is examined first
            stack.append((tau + 1, end))
            stack.append((start, tau))
        else:
            trace.record(TraceEntry(start, end, statistic, threshold, Decision.NO_CHANGE))

    return ChangepointConfiguration(tuple(sorted(taus))), trace
