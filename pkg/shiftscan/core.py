"""Domain types shared by every module: series, configurations, partitions.

Convention: a changepoint at ``tau`` is the last index of its regime, so the
mean shifts strictly after observation ``tau``. Indices are 1-based and index
1 is never a changepoint.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from shiftscan.errors import ConfigurationInvalidError, InvalidCountError, ParameterError


class SeriesKind(StrEnum):
    CONTINUOUS = "continuous"
    COUNT = "count"


@dataclass(frozen=True, eq=False)
class Series:
    """Ordered observations with their time labels.

    ``values`` is stored as a read-only float array; for count series every
    value is a nonnegative integer.
    """

    values: np.ndarray
    times: np.ndarray | None
    kind: SeriesKind = SeriesKind.CONTINUOUS
    name: str | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if self.times is None:
            times = np.arange(1, len(values) + 1, dtype=np.int64)
        else:
            times = np.array(self.times)
        kind = SeriesKind(self.kind)

        if values.ndim != 1:
            raise ParameterError("series values must be one-dimensional")
        if len(values) < 2:
            raise ParameterError(f"series needs at least 2 observations, got {len(values)}")
        if len(times) != len(values):
            raise ParameterError(
                f"times ({len(times)}) and values ({len(values)}) differ in length"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("series values must be finite")
        if np.any(np.diff(times) <= 0):
            raise ParameterError("times must be strictly increasing")
        if kind is SeriesKind.COUNT:
            check_counts(values)

        values.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "kind", kind)

    @classmethod
    def from_values(
        cls,
        values: Sequence[float],
        times: Sequence[int] | None = None,
        kind: SeriesKind | str = SeriesKind.CONTINUOUS,
        name: str | None = None,
    ) -> Series:
        return cls(np.asarray(values, dtype=float), times, SeriesKind(kind), name)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.values)

    def segment(self, start: int, end: int) -> np.ndarray:
        """Values on the 1-based inclusive index range ``start..end``."""
        return self.values[start - 1 : end]

    def time_of(self, index: int):
        """Time label of a 1-based index, as a plain Python scalar."""
        return self.times[index - 1].item()

    def with_values(self, values: np.ndarray, kind: SeriesKind | None = None) -> Series:
        return Series(values, self.times, kind or self.kind, self.name)


def check_counts(values: np.ndarray) -> None:
    """Raise ``InvalidCountError`` unless every value is a nonnegative integer."""
    values = np.asarray(values, dtype=float)
    bad = np.flatnonzero((values < 0) | (values != np.round(values)))
    if bad.size:
        i = int(bad[0])
        raise InvalidCountError(
            f"count data must be nonnegative integers; index {i + 1} holds {values[i]!r}"
        )


@dataclass(frozen=True)
class ChangepointConfiguration:
    """Sorted changepoint times ``tau_1 < ... < tau_m`` (1-based)."""

    taus: tuple[int, ...] = ()

    def __post_init__(self):
        taus = tuple(int(t) for t in self.taus)
        if any(b <= a for a, b in zip(taus, taus[1:], strict=False)):
            raise ConfigurationInvalidError(
                f"changepoints must be strictly increasing, got {list(taus)}"
            )
        if taus and taus[0] < 2:
            raise ConfigurationInvalidError(
                f"index 1 cannot be a changepoint, got {list(taus)}"
            )
        object.__setattr__(self, "taus", taus)

    @property
    def m(self) -> int:
        return len(self.taus)

    def __iter__(self) -> Iterator[int]:
        return iter(self.taus)

    def __len__(self) -> int:
        return len(self.taus)

    def validate_for(self, n: int) -> None:
        if self.taus and self.taus[-1] > n:
            raise ConfigurationInvalidError(
                f"changepoint {self.taus[-1]} outside 2..{n}"
            )

    def to_bits(self, n: int) -> np.ndarray:
        """Inclusion indicators for the admissible times ``2..n`` (length n-1)."""
        self.validate_for(n)
        bits = np.zeros(n - 1, dtype=bool)
        bits[[t - 2 for t in self.taus]] = True
        return bits

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> ChangepointConfiguration:
        return cls(tuple(int(i) + 2 for i in np.flatnonzero(bits)))

    @classmethod
    def from_mask(cls, mask: int) -> ChangepointConfiguration:
        """Decode an integer bitmask; bit ``j`` selects ``tau = j + 2``."""
        taus = []
        j = 0
        while mask:
            if mask & 1:
                taus.append(j + 2)
            mask >>= 1
            j += 1
        return cls(tuple(taus))

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        """Fewer changepoints first, then lexicographically smallest taus."""
        return (self.m, self.taus)


@dataclass(frozen=True)
class RegimePartition:
    """Contiguous inclusive ``(start, end)`` segments covering ``1..n``."""

    segments: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.segments)

    @property
    def n(self) -> int:
        return self.segments[-1][1]

    def to_config(self) -> ChangepointConfiguration:
        return ChangepointConfiguration(tuple(end for _, end in self.segments[:-1]))

    def labels(self) -> np.ndarray:
        """Regime number (0-based) of every index, as an array of length n."""
        return np.repeat(
            np.arange(len(self.segments)),
            [end - start + 1 for start, end in self.segments],
        )


def partition(config: ChangepointConfiguration, n: int) -> RegimePartition:
    """Split ``1..n`` into the m+1 regimes of ``config``.

    A changepoint at ``n`` would leave the last regime empty and is rejected,
    although ``n`` is still an admissible bit in enumeration.
    """
    if n < 1:
        raise ParameterError(f"series length must be positive, got {n}")
    config.validate_for(n)
    if config.taus and config.taus[-1] == n:
        raise ConfigurationInvalidError(
            f"changepoint at the last index {n} leaves an empty final regime"
        )
    bounds = (0, *config.taus, n)
    return RegimePartition(
        tuple((bounds[i] + 1, bounds[i + 1]) for i in range(len(bounds) - 1))
    )


def enumerate_configurations(n: int) -> Iterator[ChangepointConfiguration]:
    """Yield all 2^(n-1) subsets of ``2..n`` in bitmask order."""
    if n < 2:
        raise ParameterError(f"need n >= 2 to enumerate configurations, got {n}")
    for mask in range(1 << (n - 1)):
        yield ChangepointConfiguration.from_mask(mask)
