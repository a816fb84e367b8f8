"""Target-minus-reference differencing and mean-shift adjustment."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from shiftscan.core import ChangepointConfiguration, Series, SeriesKind, partition
from shiftscan.errors import InsufficientOverlapError, ParameterError
from shiftscan.models import SegmentFit


class Anchor(StrEnum):
    LAST_REGIME = "last-regime"
    FIRST_REGIME = "first-regime"


@dataclass(frozen=True)
class DifferenceSeries:
    series: Series
    target_id: str | None
    reference_id: str | None


def difference(target: Series, reference: Series) -> DifferenceSeries:
    """X_t - Y_t on the time labels both series share."""
    if SeriesKind.COUNT in (target.kind, reference.kind):
        raise ParameterError("difference requires continuous target and reference series")
    common, ti, ri = np.intersect1d(
        target.times, reference.times, assume_unique=True, return_indices=True
    )
    if len(common) < 2:
        raise InsufficientOverlapError(
            f"target and reference share {len(common)} time label(s); need at least 2"
        )
    name = None
    if target.name or reference.name:
        name = f"{target.name or 'target'}-minus-{reference.name or 'reference'}"
    values = target.values[ti] - reference.values[ri]
    return DifferenceSeries(
        Series(values, common, SeriesKind.CONTINUOUS, name),
        target.name,
        reference.name,
    )


def adjust(
    series: Series,
    fit: SegmentFit,
    config: ChangepointConfiguration,
    anchor: Anchor | str = Anchor.LAST_REGIME,
) -> Series:
    """Shift every regime onto the anchor regime's level.

    Delta_i - Delta_anchor is subtracted on regime i; trend and noise are
    left untouched. The result is always continuous.
    """
    if tuple(config.taus) != tuple(fit.taus):
        raise ParameterError(
            f"fit was made for changepoints {list(fit.taus)}, not {list(config.taus)}"
        )
    segments = partition(config, series.n)
    if len(fit.deltas) != len(segments):
        raise ParameterError("fit does not carry one level per regime")
    deltas = np.asarray(fit.deltas, dtype=float)
    base = deltas[-1] if Anchor(anchor) is Anchor.LAST_REGIME else deltas[0]
    offsets = (deltas - base)[segments.labels()]
    return series.with_values(series.values - offsets, SeriesKind.CONTINUOUS)
