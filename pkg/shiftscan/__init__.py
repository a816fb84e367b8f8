"""shiftscan: mean-shift changepoint detection for climate-style series."""

from shiftscan.core import (
    ChangepointConfiguration,
    RegimePartition,
    Series,
    SeriesKind,
    enumerate_configurations,
    partition,
)
from shiftscan.cusum import (
    CRITICAL_VALUES,
    AmocDecision,
    CusumProfile,
    amoc_test,
    cusum_profile,
    simulate_critical_values,
)
from shiftscan.homogenize import Anchor, DifferenceSeries, adjust, difference
from shiftscan.models import (
    PenalizedScore,
    PenaltyKind,
    SegmentFit,
    SegmentModelKind,
    fit_gauss_iid,
    fit_gauss_trend_ar1,
    fit_model,
    fit_poisson,
    penalized_score,
    penalty,
)
from shiftscan.search import GaSettings, SearchResult, exhaustive_search, genetic_search
from shiftscan.segmentation import (
    SegmentationTrace,
    binary_segmentation,
    wild_binary_segmentation,
)

__version__ = "0.1.0"

__all__ = [
    "CRITICAL_VALUES",
    "AmocDecision",
    "Anchor",
    "ChangepointConfiguration",
    "CusumProfile",
    "DifferenceSeries",
    "GaSettings",
    "PenalizedScore",
    "PenaltyKind",
    "RegimePartition",
    "SearchResult",
    "SegmentFit",
    "SegmentModelKind",
    "SegmentationTrace",
    "Series",
    "SeriesKind",
    "adjust",
    "amoc_test",
    "binary_segmentation",
    "cusum_profile",
    "difference",
    "enumerate_configurations",
    "exhaustive_search",
    "fit_gauss_iid",
    "fit_gauss_trend_ar1",
    "fit_model",
    "fit_poisson",
    "genetic_search",
    "partition",
    "penalized_score",
    "penalty",
    "simulate_critical_values",
    "wild_binary_segmentation",
]
