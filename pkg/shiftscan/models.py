"""Segment likelihoods and penalties for penalized-likelihood changepoint fits.

Three segment models are supported:

* ``gauss-iid`` - independent Gaussian errors around a per-regime mean;
* ``gauss-trend-ar1`` - per-regime intercepts, one shared linear trend and
  stationary AR(1) errors, fitted by exact Gaussian likelihood;
* ``poisson`` - independent counts with a per-regime rate.

Every fit reports -2 ln L. The search objective is -2 ln L + P(m), with
P = m ln N (BIC) or 2m (AIC).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, xlogy

from shiftscan.core import ChangepointConfiguration, Series, SeriesKind, check_counts, partition
from shiftscan.errors import ParameterError, SingularFitError

PHI_BOUND = 0.999
PHI_GRID = np.linspace(-PHI_BOUND, PHI_BOUND, 41)
VARIANCE_FLOOR = 1e-12
_LOG_2PI = math.log(2.0 * math.pi)


class SegmentModelKind(StrEnum):
    GAUSS_IID = "gauss-iid"
    GAUSS_TREND_AR1 = "gauss-trend-ar1"
    POISSON = "poisson"


class PenaltyKind(StrEnum):
    BIC = "bic"
    AIC = "aic"


@dataclass(frozen=True)
class SegmentFit:
    """Fitted parameters of one changepoint configuration.

    ``deltas`` holds regime means (Gaussian models) or rates (poisson);
    ``beta`` and ``phi`` are set only for ``gauss-trend-ar1``.
    """

    model: SegmentModelKind
    taus: tuple[int, ...]
    deltas: tuple[float, ...]
    neg2loglik: float
    sigma2: float | None = None
    beta: float | None = None
    phi: float | None = None
    degenerate: bool = False

    @property
    def m(self) -> int:
        return len(self.taus)

    @property
    def config(self) -> ChangepointConfiguration:
        return ChangepointConfiguration(self.taus)

    def fitted_means(self, n: int) -> np.ndarray:
        """mu_t for t = 1..n: the regime level, plus beta * t under a trend."""
        labels = partition(self.config, n).labels()
        mu = np.asarray(self.deltas, dtype=float)[labels]
        if self.beta is not None:
            mu = mu + self.beta * np.arange(1, n + 1)
        return mu


@dataclass(frozen=True)
class PenalizedScore:
    neg2loglik: float
    penalty: float
    total: float

    @classmethod
    def of(cls, neg2loglik: float, penalty_value: float) -> PenalizedScore:
        return cls(neg2loglik, penalty_value, neg2loglik + penalty_value)


def variance_floor(values: np.ndarray) -> float:
    """Smallest admissible ML variance: 1e-12 times the squared data scale."""
    scale = float(np.max(np.abs(values))) if len(values) else 0.0
    return VARIANCE_FLOOR * (scale if scale > 0 else 1.0) ** 2


def segment_rss(values: np.ndarray) -> float:
    centered = values - values.mean()
    return float(centered @ centered)


def segment_poisson_loglik(values: np.ndarray) -> float:
    """Poisson log-likelihood of one regime at its ML rate (0 ln 0 = 0)."""
    rate = values.mean()
    return float(np.sum(xlogy(values, rate) - rate - gammaln(values + 1.0)))


def gaussian_neg2loglik(rss: float, n: int, floor: float) -> tuple[float, float, bool]:
    """-2 ln L at the ML variance rss/n; returns (value, sigma2, degenerate)."""
    sigma2 = rss / n
    degenerate = sigma2 <= floor
    sigma2 = max(sigma2, floor)
    return n * (_LOG_2PI + math.log(sigma2)) + n, sigma2, degenerate


def _regimes(series: Series, config: ChangepointConfiguration) -> list[np.ndarray]:
    return [series.segment(a, b) for a, b in partition(config, series.n)]


def fit_gauss_iid(series: Series, config: ChangepointConfiguration) -> SegmentFit:
    regimes = _regimes(series, config)
    rss = math.fsum(segment_rss(r) for r in regimes)
    neg2, sigma2, degenerate = gaussian_neg2loglik(
        rss, series.n, variance_floor(series.values)
    )
    return SegmentFit(
        model=SegmentModelKind.GAUSS_IID,
        taus=config.taus,
        deltas=tuple(float(r.mean()) for r in regimes),
        neg2loglik=neg2,
        sigma2=sigma2,
        degenerate=degenerate,
    )


def fit_poisson(series: Series, config: ChangepointConfiguration) -> SegmentFit:
    if series.kind is not SeriesKind.COUNT:
        raise ParameterError("the poisson model requires a count series")
    check_counts(series.values)
    regimes = _regimes(series, config)
    loglik = math.fsum(segment_poisson_loglik(r) for r in regimes)
    return SegmentFit(
        model=SegmentModelKind.POISSON,
        taus=config.taus,
        deltas=tuple(float(r.mean()) for r in regimes),
        neg2loglik=-2.0 * loglik,
    )


class _TrendAr1Problem:
    """Regime indicators + time design with the profile likelihood in phi.

    The Prais-Winsten whitened Gram matrix is X'QX with the AR(1) precision
    Q(phi) = I + phi^2 M - phi S (M: interior diagonal, S: first off-diagonals),
    so the pieces are accumulated once and every phi costs a p x p solve.
    y and t are centered; the intercepts are mapped back in ``solve``.
    """

    def __init__(self, series: Series, config: ChangepointConfiguration):
        n = series.n
        segments = partition(config, n)
        p = len(segments) + 1
        # with n >= p + 1 some regime has two points, so time is never collinear
        if n < p + 1:
            short = next((i + 1 for i, (a, b) in enumerate(segments) if a == b), 1)
            raise SingularFitError(
                f"trend + AR(1) fit with {len(segments)} regimes needs at least "
                f"{p + 1} observations, got {n} (regime {short} is a single point)",
                regime=short,
            )
        y = np.asarray(series.values, dtype=float)
        self.n = n
        self.t_mean = (n + 1) / 2.0
        self.y_mean = float(y.mean())
        self.floor = variance_floor(y)

        design = np.zeros((n, p))
        design[np.arange(n), segments.labels()] = 1.0
        design[:, -1] = np.arange(1, n + 1) - self.t_mean
        yc = y - self.y_mean
        self.design = design
        self.yc = yc

        head, tail, inner = design[:-1], design[1:], design[1:-1]
        cross = head.T @ tail
        self._gram = (design.T @ design, inner.T @ inner, cross + cross.T)
        self._moment = (design.T @ yc, inner.T @ yc[1:-1], head.T @ yc[1:] + tail.T @ yc[:-1])
        self._yy = (float(yc @ yc), float(yc[1:-1] @ yc[1:-1]), 2.0 * float(yc[:-1] @ yc[1:]))

    def _normal_equations(self, phis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        sq = (phis * phis)[:, None]
        lin = phis[:, None]
        g0, g2, g1 = self._gram
        m0, m2, m1 = self._moment
        gram = g0 + sq[..., None] * g2 - lin[..., None] * g1
        moment = m0 + sq * m2 - lin * m1
        try:
            coef = np.linalg.solve(gram, moment[..., None])[..., 0]
        except np.linalg.LinAlgError:
            raise SingularFitError("trend + AR(1) design is rank deficient") from None
        return coef, moment

    def profile_values(self, phis: np.ndarray) -> np.ndarray:
        """-2 ln L profiled over the regression coefficients, one value per phi."""
        phis = np.asarray(phis, dtype=float)
        coef, moment = self._normal_equations(phis)
        s0, s2, s1 = self._yy
        rss = s0 + phis * phis * s2 - phis * s1 - np.einsum("ij,ij->i", coef, moment)
        sigma2 = np.maximum(np.maximum(rss, 0.0) / self.n, self.floor)
        return self.n * (_LOG_2PI + np.log(sigma2)) + self.n - np.log1p(-phis * phis)

    def profile(self, phi: float) -> float:
        return float(self.profile_values(np.array([phi]))[0])

    def solve(self, phi: float) -> tuple[float, np.ndarray, float, float, bool]:
        """Fit at fixed phi: (-2 ln L, deltas, beta, sigma2, degenerate)."""
        coef, _ = self._normal_equations(np.array([phi]))
        coef = coef[0]
        resid = self.yc - self.design @ coef
        rss = (
            float(resid @ resid)
            + phi * phi * float(resid[1:-1] @ resid[1:-1])
            - 2.0 * phi * float(resid[:-1] @ resid[1:])
        )
        neg2, sigma2, degenerate = gaussian_neg2loglik(max(rss, 0.0), self.n, self.floor)
        beta = float(coef[-1])
        deltas = coef[:-1] + self.y_mean - beta * self.t_mean
        return neg2 - math.log1p(-phi * phi), deltas, beta, sigma2, degenerate

    def best_phi(self) -> float:
        values = self.profile_values(PHI_GRID)
        i = int(np.argmin(values))
        last = len(PHI_GRID) - 1
        if 0 < i < last and values[i] < values[i - 1] and values[i] < values[i + 1]:
            result = minimize_scalar(
                self.profile,
                bracket=(PHI_GRID[i - 1], PHI_GRID[i], PHI_GRID[i + 1]),
                method="golden",
                options={"xtol": 1e-7},
            )
        else:
            result = minimize_scalar(
                self.profile,
                bounds=(PHI_GRID[max(i - 1, 0)], PHI_GRID[min(i + 1, last)]),
                method="bounded",
                options={"xatol": 1e-7},
            )
        phi = float(np.clip(result.x, -PHI_BOUND, PHI_BOUND))
        return phi if self.profile(phi) < values[i] else float(PHI_GRID[i])


def fit_gauss_trend_ar1(
    series: Series, config: ChangepointConfiguration, phi: float | None = None
) -> SegmentFit:
    """Exact-likelihood fit of mu_t = Delta_i + beta*t with AR(1) errors.

    phi is profiled out over [-0.999, 0.999] (41-point grid, then golden
    section); pass ``phi`` to hold it fixed instead.
    """
    if phi is not None and not -PHI_BOUND <= phi <= PHI_BOUND:
        raise ParameterError(f"|phi| must not exceed {PHI_BOUND}, got {phi}")
    problem = _TrendAr1Problem(series, config)
    if phi is None:
        phi = problem.best_phi()
    neg2, deltas, beta, sigma2, degenerate = problem.solve(phi)
    return SegmentFit(
        model=SegmentModelKind.GAUSS_TREND_AR1,
        taus=config.taus,
        deltas=tuple(float(d) for d in deltas),
        neg2loglik=neg2,
        sigma2=sigma2,
        beta=beta,
        phi=float(phi),
        degenerate=degenerate,
    )


_FITTERS = {
    SegmentModelKind.GAUSS_IID: fit_gauss_iid,
    SegmentModelKind.GAUSS_TREND_AR1: fit_gauss_trend_ar1,
    SegmentModelKind.POISSON: fit_poisson,
}


def fit_model(
    kind: SegmentModelKind | str, series: Series, config: ChangepointConfiguration
) -> SegmentFit:
    return _FITTERS[SegmentModelKind(kind)](series, config)


def penalty(kind: PenaltyKind | str, m: int, n: int) -> float:
    if m < 0:
        raise ParameterError(f"changepoint count must be >= 0, got {m}")
    if n < 2:
        raise ParameterError(f"series length must be >= 2, got {n}")
    if PenaltyKind(kind) is PenaltyKind.BIC:
        return m * math.log(n)
    return 2.0 * m


def penalized_score(
    series: Series,
    config: ChangepointConfiguration,
    model: SegmentModelKind | str,
    penalty_kind: PenaltyKind | str,
) -> PenalizedScore:
    fit = fit_model(model, series, config)
    return PenalizedScore.of(fit.neg2loglik, penalty(penalty_kind, config.m, series.n))
