"""CSV ingestion (``time,value``) and plot-ready CSV output."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import pathlib
from typing import TextIO

import numpy as np

from shiftscan.core import Series, SeriesKind
from shiftscan.errors import CsvParseError, InvalidCountError, ParameterError

logger = logging.getLogger(__name__)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_series(
    handle: TextIO, kind: SeriesKind | str = SeriesKind.CONTINUOUS, name: str | None = None
) -> Series:
    """Parse ``time,value`` rows; a first row whose time cell is not numeric is a header."""
    kind = SeriesKind(kind)
    times: list[int] = []
    values: list[float] = []
    first_row = True

    for line_no, row in enumerate(csv.reader(handle), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise CsvParseError(f"expected 2 columns, found {len(row)}", line_no)
        time_text, value_text = (cell.strip() for cell in row)
        is_header = first_row and not _is_number(time_text)
        first_row = False
        if is_header:
            logger.debug("Treating line %d as a header: %s", line_no, row)
            continue

        try:
            time_value = float(time_text)
        except ValueError:
            raise CsvParseError(f"time {time_text!r} is not a number", line_no) from None
        if not time_value.is_integer():
            raise CsvParseError(f"time {time_text!r} is not an integer", line_no)
        try:
            value = float(value_text)
        except ValueError:
            raise CsvParseError(f"value {value_text!r} is not a number", line_no) from None
        if not math.isfinite(value):
            raise CsvParseError(f"value {value_text!r} is not finite", line_no)
        if kind is SeriesKind.COUNT and (value < 0 or not value.is_integer()):
            raise InvalidCountError(
                f"line {line_no}: count {value_text!r} is not a nonnegative integer"
            )
        if times and int(time_value) <= times[-1]:
            raise CsvParseError(
                f"time {int(time_value)} does not increase past {times[-1]}", line_no
            )
        times.append(int(time_value))
        values.append(value)

    if len(values) < 2:
        raise ParameterError(f"series needs at least 2 rows, found {len(values)}")
    return Series(np.array(values), np.array(times, dtype=np.int64), kind, name)


def ingest_csv(
    path: str | os.PathLike, kind: SeriesKind | str = SeriesKind.CONTINUOUS
) -> Series:
    csv_path = pathlib.Path(path)
    if not csv_path.is_file():
        raise ParameterError(f"Input file not found: {csv_path}")
    raw = csv_path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        raise CsvParseError(f"{csv_path.name} is not valid UTF-8 text", line) from None
    series = read_series(io.StringIO(text, newline=""), kind, name=csv_path.stem)
    logger.info("Read %d observations from %s", series.n, csv_path)
    return series


def _format_value(value: float, kind: SeriesKind) -> str:
    if kind is SeriesKind.COUNT:
        return str(int(value))
    return repr(float(value))


def series_to_csv(series: Series) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["time", "value"])
    for t, v in zip(series.times.tolist(), series.values.tolist(), strict=True):
        writer.writerow([t, _format_value(v, series.kind)])
    return out.getvalue()


def fitted_to_csv(series: Series, fitted: np.ndarray) -> str:
    """``time,observed,fitted`` rows for overlay plots."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["time", "observed", "fitted"])
    for t, v, f in zip(series.times.tolist(), series.values.tolist(), fitted.tolist(), strict=True):
        writer.writerow([t, _format_value(v, series.kind), repr(float(f))])
    return out.getvalue()
