"""Tests for binary and wild binary segmentation."""

import numpy as np
import pytest

from shiftscan.core import Series
from shiftscan.cusum import cusum_profile
from shiftscan.errors import ParameterError
from shiftscan.models import PenaltyKind, SegmentModelKind
from shiftscan.search import exhaustive_search
from shiftscan.segmentation import (
    Decision,
    binary_segmentation,
    draw_intervals,
    wild_binary_segmentation,
)

TRAP_TAUS = (5, 11)


def opposing_shift_series(c: float, seed: int) -> Series:
    """5 zeros, 6 values at +c, 5 zeros, plus unit normal noise."""
    rng = np.random.default_rng(seed)
    mean = np.r_[np.zeros(5), np.full(6, c), np.zeros(5)]
    return Series.from_values(mean + rng.standard_normal(16))


def near(found, truth, tol):
    return all(any(abs(t - f) <= tol for f in found) for t in truth)


@pytest.fixture(scope="module")
def trap():
    """Grid search over the shift size for a series that fools binary segmentation.

    The full-series CUSUM must stay below the 95% critical value while the
    BIC optimum still holds both shifts.
    """
    for c in np.arange(12.0, 3.5, -0.5):
        series = opposing_shift_series(c, seed=7)
        if cusum_profile(series).max_abs >= 1.358:
            continue
        best = exhaustive_search(series, SegmentModelKind.GAUSS_IID, PenaltyKind.BIC)
        if near(best.best_config.taus, TRAP_TAUS, 2):
            return series
    pytest.fail("no shift size in the grid produces the opposing-shift trap")


class TestBinarySegmentation:
    def test_constant_series(self):
        config, trace = binary_segmentation(Series.from_values([4.0] * 20))
        assert config.taus == ()
        assert trace.entries[0].decision is Decision.DEGENERATE

    def test_single_large_shift(self):
        rng = np.random.default_rng(21)
        values = np.r_[np.zeros(50), np.full(50, 10.0)] + rng.standard_normal(100)
        config, trace = binary_segmentation(Series.from_values(values), 0.99)
        assert len(config.taus) == 1
        assert abs(config.taus[0] - 50) <= 2
        assert trace.flagged == list(config.taus)

    def test_opposing_shifts_fool_binseg(self, trap):
        config, trace = binary_segmentation(trap, 0.95)
        assert config.taus == ()
        assert trace.entries[0].decision is Decision.NO_CHANGE

    def test_exhaustive_recovers_trap(self, trap):
        best = exhaustive_search(trap, SegmentModelKind.GAUSS_IID, PenaltyKind.BIC)
        assert near(best.best_config.taus, TRAP_TAUS, 2)

    def test_short_segments_are_not_examined(self):
        config, trace = binary_segmentation(Series.from_values([0, 0, 9, 9]), 0.95, min_len=5)
        assert config.taus == ()
        assert trace.entries[0].decision is Decision.TOO_SHORT

    def test_affine_invariance(self):
        rng = np.random.default_rng(6)
        values = np.r_[rng.normal(0, 1, 40), rng.normal(4, 1, 30), rng.normal(-1, 1, 40)]
        base, _ = binary_segmentation(Series.from_values(values))
        moved, _ = binary_segmentation(Series.from_values(2.5 * values + 40.0))
        assert moved == base

    def test_every_flagged_tau_is_reported(self):
        rng = np.random.default_rng(10)
        values = np.r_[rng.normal(0, 1, 60), rng.normal(5, 1, 60), rng.normal(0, 1, 60)]
        config, trace = binary_segmentation(Series.from_values(values))
        assert sorted(trace.flagged) == list(config.taus)
        assert all(2 <= t < 180 for t in config.taus)

    def test_rejects_min_len_below_two(self, two_step_series):
        with pytest.raises(ParameterError):
            binary_segmentation(two_step_series, min_len=1)


class TestWildBinarySegmentation:
    def test_without_intervals_equals_binseg(self):
        for seed in range(8):
            rng = np.random.default_rng(seed)
            values = np.r_[rng.normal(0, 1, 30), rng.normal(seed % 3, 1, 30)]
            series = Series.from_values(values)
            wild, _ = wild_binary_segmentation(series, num_intervals=0, threshold=1.358)
            plain, _ = binary_segmentation(series, 0.95)
            assert wild == plain

    def test_finds_both_opposing_shifts(self, trap):
        config, _ = wild_binary_segmentation(trap, 500, 1.358, seed=3)
        assert near(config.taus, TRAP_TAUS, 3)

    def test_same_seed_same_trace(self):
        rng = np.random.default_rng(0)
        series = Series.from_values(rng.normal(size=120))
        first = wild_binary_segmentation(series, 200, 1.358, seed=42)
        second = wild_binary_segmentation(series, 200, 1.358, seed=42)
        assert first[0] == second[0]
        assert first[1].entries == second[1].entries

    def test_flags_at_least_as_often_as_binseg_on_noise(self):
        wild_counts, plain_counts = [], []
        for seed in range(20):
            series = Series.from_values(np.random.default_rng(seed).standard_normal(200))
            wild_counts.append(wild_binary_segmentation(series, 500, 1.358, seed=seed)[0].m)
            plain_counts.append(binary_segmentation(series, 0.95)[0].m)
        assert np.mean(wild_counts) >= np.mean(plain_counts)

    def test_interval_draws(self):
        draws = draw_intervals(30, 100, 4, np.random.default_rng(1))
        assert len(draws) == 100
        assert all(1 <= d.start and d.end <= 30 and d.end - d.start + 1 >= 4 for d in draws)

    @pytest.mark.parametrize("kwargs", [{"num_intervals": -1}, {"threshold": 0.0}, {"min_len": 1}])
    def test_rejects_bad_arguments(self, two_step_series, kwargs):
        with pytest.raises(ParameterError):
            wild_binary_segmentation(two_step_series, **kwargs)
