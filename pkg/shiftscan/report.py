"""DetectReport: the machine-readable outcome of ``shiftctl detect``."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
import io
import json
from typing import Any

from shiftscan.core import Series, partition
from shiftscan.models import SegmentFit

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RegimeRow:
    regime: int
    start_index: int
    end_index: int
    start_time: Any
    end_time: Any
    level: float


@dataclass
class DetectReport:
    method: str
    model: str | None
    penalty: str | None
    level: float | None
    threshold: float | None
    seed: int | None
    n: int
    taus: list[int]
    tau_times: list[Any]
    regimes: list[RegimeRow]
    beta: float | None
    phi: float | None
    sigma2: float | None
    neg2loglik: float | None
    penalty_value: float | None
    total: float | None
    fitted: list[float]
    runtime_seconds: float
    evaluations: int | None = None
    amoc: dict[str, Any] | None = None
    warning: str | None = None
    schema_version: int = field(default=SCHEMA_VERSION)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        return {"schema_version": data.pop("schema_version"), **data}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["field", "value"])
        data = self.to_dict()
        for key in (
            "schema_version", "method", "model", "penalty", "level", "threshold",
            "seed", "n", "beta", "phi", "sigma2", "neg2loglik", "penalty_value",
            "total", "evaluations", "runtime_seconds", "warning",
        ):
            writer.writerow([key, "" if data[key] is None else data[key]])
        writer.writerow(["taus", " ".join(str(t) for t in self.taus)])
        writer.writerow(["tau_times", " ".join(str(t) for t in self.tau_times)])
        for key, value in (self.amoc or {}).items():
            writer.writerow([f"amoc_{key}", value])
        writer.writerow([])
        writer.writerow(["regime", "start_index", "end_index", "start_time", "end_time", "level"])
        for row in self.regimes:
            writer.writerow(
                [row.regime, row.start_index, row.end_index, row.start_time, row.end_time, row.level]
            )
        return out.getvalue()


def build_report(
    series: Series,
    method: str,
    fit: SegmentFit,
    *,
    model: str | None,
    penalty: str | None = None,
    penalty_value: float | None = None,
    level: float | None = None,
    threshold: float | None = None,
    seed: int | None = None,
    runtime_seconds: float = 0.0,
    evaluations: int | None = None,
    amoc: dict[str, Any] | None = None,
    warning: str | None = None,
) -> DetectReport:
    segments = partition(fit.config, series.n)
    regimes = [
        RegimeRow(
            regime=i + 1,
            start_index=start,
            end_index=end,
            start_time=series.time_of(start),
            end_time=series.time_of(end),
            level=level_value,
        )
        for i, ((start, end), level_value) in enumerate(zip(segments, fit.deltas, strict=True))
    ]
    total = None if penalty_value is None else fit.neg2loglik + penalty_value
    return DetectReport(
        method=method,
        model=model,
        penalty=penalty,
        level=level,
        threshold=threshold,
        seed=seed,
        n=series.n,
        taus=list(fit.taus),
        tau_times=[series.time_of(t) for t in fit.taus],
        regimes=regimes,
        beta=fit.beta,
        phi=fit.phi,
        sigma2=fit.sigma2,
        neg2loglik=fit.neg2loglik,
        penalty_value=penalty_value,
        total=total,
        fitted=fit.fitted_means(series.n).tolist(),
        runtime_seconds=runtime_seconds,
        evaluations=evaluations,
        amoc=amoc,
        warning=warning,
    )
