"""Tests for differencing against a reference and shift adjustment."""

import numpy as np
import pytest

from shiftscan.core import ChangepointConfiguration, Series
from shiftscan.errors import InsufficientOverlapError, ParameterError
from shiftscan.homogenize import Anchor, adjust, difference
from shiftscan.models import PenaltyKind, SegmentModelKind, fit_gauss_iid, fit_gauss_trend_ar1
from shiftscan.search import exhaustive_search
from shiftscan.simulate import simulate_series


def station(values, start=1, name=None):
    return Series.from_values(values, times=list(range(start, start + len(values))), name=name)


class TestDifference:
    def test_identical_series_give_zero(self):
        rng = np.random.default_rng(0)
        values = rng.normal(size=12)
        result = difference(station(values), station(values))
        assert np.all(result.series.values == 0.0)

    def test_shift_carries_through(self):
        rng = np.random.default_rng(1)
        reference = rng.normal(size=20)
        target = reference + np.r_[np.zeros(8), np.full(12, 3.0)]
        diff = difference(station(target), station(reference)).series.values
        np.testing.assert_allclose(diff, np.r_[np.zeros(8), np.full(12, 3.0)], atol=1e-12)

    def test_time_intersection(self):
        target = station(np.arange(10.0), start=1, name="target")
        reference = station(np.arange(10.0), start=6, name="reference")
        result = difference(target, reference)
        assert result.series.times.tolist() == [6, 7, 8, 9, 10]
        assert result.series.values.tolist() == [5.0] * 5
        assert (result.target_id, result.reference_id) == ("target", "reference")

    def test_antisymmetric(self):
        rng = np.random.default_rng(2)
        a, b = station(rng.normal(size=9)), station(rng.normal(size=9), start=3)
        np.testing.assert_array_equal(
            difference(a, b).series.values, -difference(b, a).series.values
        )

    def test_insufficient_overlap(self):
        with pytest.raises(InsufficientOverlapError):
            difference(station([1.0, 2.0, 3.0]), station([1.0, 2.0], start=3))

    def test_count_series_rejected(self):
        counts = Series.from_values([1, 2, 3], kind="count")
        with pytest.raises(ParameterError):
            difference(counts, station([1.0, 2.0, 3.0]))


class TestAdjust:
    def test_no_changepoints_is_identity(self):
        series = station([3.0, 1.0, 4.0, 1.0, 5.0])
        fit = fit_gauss_iid(series, ChangepointConfiguration())
        adjusted = adjust(series, fit, ChangepointConfiguration())
        np.testing.assert_array_equal(adjusted.values, series.values)

    @pytest.mark.parametrize("anchor, expected", [
        (Anchor.LAST_REGIME, [5, 5, 5, 5]),
        (Anchor.FIRST_REGIME, [1, 1, 1, 1]),
    ])
    def test_exact_fit_series(self, anchor, expected):
        series = station([1.0, 1.0, 5.0, 5.0])
        config = ChangepointConfiguration((2,))
        adjusted = adjust(series, fit_gauss_iid(series, config), config, anchor)
        assert adjusted.values.tolist() == expected

    def test_adjusted_series_has_no_changepoints(self):
        series = simulate_series(
            SegmentModelKind.GAUSS_IID, 14, taus=[4, 9], levels=[2.0, -1.0, 3.0], sigma=0.0
        )
        config = exhaustive_search(series, SegmentModelKind.GAUSS_IID, PenaltyKind.BIC).best_config
        assert config.taus == (4, 9)
        adjusted = adjust(series, fit_gauss_iid(series, config), config)
        refit = exhaustive_search(adjusted, SegmentModelKind.GAUSS_IID, PenaltyKind.BIC)
        assert refit.best_config.taus == ()

    def test_idempotent_on_noise_free_input(self):
        series = station([1.0, 1.0, 1.0, 4.0, 4.0, 4.0])
        config = ChangepointConfiguration((3,))
        once = adjust(series, fit_gauss_iid(series, config), config)
        twice = adjust(once, fit_gauss_iid(once, config), config)
        np.testing.assert_array_equal(once.values, twice.values)

    def test_trend_is_left_alone(self):
        series = simulate_series(
            SegmentModelKind.GAUSS_TREND_AR1, 40, taus=[20], levels=[0.0, 2.0],
            beta=0.05, sigma=0.0,
        )
        config = ChangepointConfiguration((20,))
        fit = fit_gauss_trend_ar1(series, config, phi=0.0)
        adjusted = adjust(series, fit, config)
        slope = np.polyfit(np.arange(1, 41), adjusted.values, 1)[0]
        assert slope == pytest.approx(0.05, abs=1e-8)

    def test_fit_must_match_config(self):
        series = station([1.0, 1.0, 5.0, 5.0])
        fit = fit_gauss_iid(series, ChangepointConfiguration((2,)))
        with pytest.raises(ParameterError):
            adjust(series, fit, ChangepointConfiguration((3,)))
