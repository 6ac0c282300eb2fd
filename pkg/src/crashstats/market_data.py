"""Daily closing-price series: CSV ingestion, validation and log returns.

The canonical on-disk format is a two-column CSV with header ``date,close``
(ISO dates, UTF-8, LF line endings).  Vendor exports such as Yahoo Finance's
``Date,Open,High,Low,Close,Adj Close,Volume`` are read by naming the date and
close columns through a :class:`CsvSchema`.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import InputError

logger = logging.getLogger(__name__)

_FALLBACK_DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y", "%Y/%m/%d")
_MISSING_TOKENS = {"", "null", "nan", "na", "n/a", "none", "-"}


@dataclass(frozen=True)
class CsvSchema:
    """Column mapping used by :func:`load_csv`.

    Column names are matched exactly first, then case-insensitively.
    """

    date: str = "date"
    close: str = "close"
    date_format: str | None = None

    @classmethod
    def parse(cls, text: str) -> "CsvSchema":
        """Parse ``"date=Date,close=Adj Close"`` (the CLI ``--schema`` flag)."""
        kwargs: dict[str, str] = {}
        for part in text.split(","):
            if not part.strip():
                continue
            key, sep, value = part.partition("=")
            key = key.strip().lower()
            if not sep or key not in {"date", "close", "date_format"}:
                raise InputError(f"bad schema entry {part!r}; expected date=<col>,close=<col>")
            kwargs[key] = value.strip()
        return cls(**kwargs)


@dataclass(frozen=True)
class PriceSeries:
    """Dated daily closing prices for one instrument.

    ``dates`` must be strictly increasing and every close positive.
    ``price_field`` records which source column the closes came from
    (raw vs adjusted close) and ``dropped_rows`` how many input rows were
    discarded for a missing or non-positive close.
    """

    ticker: str
    dates: tuple[date, ...]
    closes: tuple[float, ...]
    price_field: str = "close"
    dropped_rows: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", tuple(float(c) for c in self.closes))
        if len(self.dates) != len(self.closes):
            raise InputError("dates and closes differ in length")
        if not self.dates:
            raise InputError("empty price series")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise InputError(f"dates not strictly increasing at {cur.isoformat()}")
        for d, c in zip(self.dates, self.closes):
            if not (c > 0 and math.isfinite(c)):
                raise InputError(f"non-positive close {c!r} on {d.isoformat()}")

    def __len__(self) -> int:
        return len(self.dates)

    @cached_property
    def values(self) -> np.ndarray:
        """Closes as a read-only float array."""
        arr = np.asarray(self.closes, dtype=float)
        arr.setflags(write=False)
        return arr

    def index_of(self, day: date) -> int:
        """Position of ``day`` in the series; raises ``KeyError`` if absent."""
        try:
            return self._positions[day]
        except KeyError:
            raise KeyError(day.isoformat()) from None

    @cached_property
    def _positions(self) -> dict[date, int]:
        return {d: i for i, d in enumerate(self.dates)}


@dataclass(frozen=True)
class ReturnSeries:
    """Base-10 log returns, each dated by the later of its two closes."""

    dates: tuple[date, ...]
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)


def parse_date(text: str, fmt: str | None = None) -> date:
    text = text.strip()
    if fmt:
        return datetime.strptime(text, fmt).date()
    for candidate in _FALLBACK_DATE_FORMATS:
        try:
            return datetime.strptime(text, candidate).date()
        except ValueError:
            continue
    raise ValueError(f"unrecognised date {text!r}")


def _resolve_column(header: Sequence[str], wanted: str) -> int:
    if wanted in header:
        return header.index(wanted)
    lowered = [h.strip().lower() for h in header]
    if wanted.strip().lower() in lowered:
        return lowered.index(wanted.strip().lower())
    raise InputError(f"column {wanted!r} not found in header {list(header)}")


def read_csv(fp: IO[str], schema: CsvSchema | None = None, ticker: str = "") -> PriceSeries:
    """Read a price series from an open text stream.  See :func:`load_csv`."""
    schema = schema or CsvSchema()
    reader = csv.reader(fp)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty CSV file") from None
    date_col = _resolve_column(header, schema.date)
    close_col = _resolve_column(header, schema.close)

    rows: list[tuple[date, float]] = []
    dropped = 0
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            day = parse_date(row[date_col], schema.date_format)
        except (ValueError, IndexError) as exc:
            raise InputError(f"line {lineno}: {exc}") from None
        raw = row[close_col].strip() if close_col < len(row) else ""
        if raw.lower() in _MISSING_TOKENS:
            dropped += 1
            continue
        try:
            close = float(raw)
        except ValueError:
            raise InputError(f"line {lineno}: close {raw!r} is not a number") from None
        if not (close > 0 and math.isfinite(close)):
            dropped += 1
            continue
        rows.append((day, close))

    if not rows:
        raise InputError("no parseable rows")
    rows.sort(key=lambda r: r[0])
    for (d0, _), (d1, _) in zip(rows, rows[1:]):
        if d0 == d1:
            raise InputError(f"duplicate date {d0.isoformat()}")
    if dropped:
        logger.info("dropped %d rows with missing or non-positive close", dropped)
    return PriceSeries(
        ticker=ticker,
        dates=tuple(r[0] for r in rows),
        closes=tuple(r[1] for r in rows),
        price_field=header[close_col].strip(),
        dropped_rows=dropped,
    )


def load_csv(path: str | Path, schema: CsvSchema | None = None, ticker: str | None = None) -> PriceSeries:
    """Load a daily close series from a CSV file.

    Rows are sorted by date.  Rows whose close is missing, zero or negative
    are dropped and counted in ``PriceSeries.dropped_rows``.  Duplicate dates
    are rejected as corrupt input.

    Parameters
    ----------
    path : str or Path
        CSV file to read.
    schema : CsvSchema, optional
        Column mapping; defaults to the canonical ``date,close`` header.
    ticker : str, optional
        Identifier stored on the series; defaults to the file stem.
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8-sig", newline="") as fp:
            return read_csv(fp, schema, ticker if ticker is not None else path.stem)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def write_csv(series: PriceSeries, fp: IO[str]) -> None:
    """Write the canonical ``date,close`` CSV.  Closes use ``repr`` so they round-trip exactly."""
    fp.write("date,close\n")
    for d, c in zip(series.dates, series.closes):
        fp.write(f"{d.isoformat()},{c!r}\n")


def save_csv(series: PriceSeries, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fp:
        write_csv(series, fp)


def to_csv_text(series: PriceSeries) -> str:
    buf = io.StringIO()
    write_csv(series, buf)
    return buf.getvalue()


def log_returns(series: PriceSeries) -> ReturnSeries:
    """Base-10 log returns ``log10(P_t / P_{t-1})``; one fewer than the closes."""
    if len(series) < 2:
        raise InputError("need at least two closes to compute returns")
    c = series.values
    values = np.log10(c[1:] / c[:-1])
    return ReturnSeries(dates=series.dates[1:], values=tuple(values.tolist()))


def slice_series(series: PriceSeries, start: date, end: date) -> PriceSeries:
    """Sub-series of all observations with ``start <= date <= end``."""
    if start > end:
        raise InputError(f"slice start {start} after end {end}")
    keep = [i for i, d in enumerate(series.dates) if start <= d <= end]
    if not keep:
        raise InputError(f"no trading days between {start} and {end}")
    lo, hi = keep[0], keep[-1] + 1
    return PriceSeries(
        ticker=series.ticker,
        dates=series.dates[lo:hi],
        closes=series.closes[lo:hi],
        price_field=series.price_field,
        dropped_rows=series.dropped_rows,
    )


def from_closes(closes: Iterable[float], start: date | None = None, ticker: str = "synthetic") -> PriceSeries:
    """Build a series on consecutive business days (Mon-Fri) from bare closes."""
    closes = list(closes)
    day = start or date(2000, 1, 3)
    dates: list[date] = []
    while len(dates) < len(closes):
        if day.weekday() < 5:
            dates.append(day)
        day += timedelta(days=1)
    return PriceSeries(ticker=ticker, dates=tuple(dates), closes=tuple(closes))
