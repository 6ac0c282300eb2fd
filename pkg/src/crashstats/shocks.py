"""Consecutive-decline runs ("shocks"), the mainshock and its aftershocks.

A shock runs from a local peak close through every following strictly lower
close to the trough.  Its magnitude is ``M = log10(peak / trough)``, so the
fractional fall is ``1 - 10**-M``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from datetime import date
from typing import IO, Sequence

from .errors import InputError, NoShocksError
from .market_data import PriceSeries

BOUNDARY_RTOL = 1e-12

SHOCK_FIELDS = ("start_date", "end_date", "peak", "trough", "duration", "magnitude", "pct_fall")


@dataclass(frozen=True)
class Shock:
    """One maximal run of strictly decreasing closes.

    ``start_index``/``end_index`` are positions in the source series of the
    peak and the trough; ``duration_days`` is the number of declining days,
    ``end_index - start_index``.
    """

    start_date: date
    end_date: date
    peak_price: float
    trough_price: float
    duration_days: int
    magnitude: float
    pct_fall: float
    start_index: int = -1
    end_index: int = -1

    def to_dict(self) -> dict:
        return {
            "start_date": self.start_date.isoformat(),
            "end_date": self.end_date.isoformat(),
            "peak": self.peak_price,
            "trough": self.trough_price,
            "duration": self.duration_days,
            "magnitude": self.magnitude,
            "pct_fall": self.pct_fall,
        }


@dataclass(frozen=True)
class CrisisWindow:
    mainshock: Shock
    window_start: date
    window_end: date
    aftershocks: tuple[Shock, ...]
    open_ended: bool = False


def _make_shock(series: PriceSeries, i: int, j: int) -> Shock:
    peak, trough = series.closes[i], series.closes[j]
    return Shock(
        start_date=series.dates[i],
        end_date=series.dates[j],
        peak_price=peak,
        trough_price=trough,
        duration_days=j - i,
        magnitude=math.log10(peak / trough),
        pct_fall=1.0 - trough / peak,
        start_index=i,
        end_index=j,
    )


def detect_shocks(series: PriceSeries) -> list[Shock]:
    """Split ``series`` into its maximal strictly-decreasing runs, in date order.

    An unchanged close ends a run.  Runs share at most an endpoint with
    neighbouring rises and never overlap each other.
    """
    n = len(series)
    if n < 2:
        raise InputError("need at least two closes to detect shocks")
    c = series.closes
    shocks: list[Shock] = []
    i = 0
    while i < n - 1:
        if c[i + 1] < c[i]:
            j = i + 1
            while j + 1 < n and c[j + 1] < c[j]:
                j += 1
            shocks.append(_make_shock(series, i, j))
            i = j
        else:
            i += 1
    return shocks


def identify_mainshock(
    shocks: Sequence[Shock],
    search_window: tuple[date, date] | None = None,
) -> Shock:
    """Largest-magnitude shock, optionally among those starting inside ``search_window``.

    Ties go to the earliest shock.
    """
    candidates = list(shocks)
    if search_window is not None:
        lo, hi = search_window
        candidates = [s for s in candidates if lo <= s.start_date <= hi]
    if not candidates:
        raise NoShocksError("no shocks found" + (" in search window" if search_window else ""))
    best = candidates[0]
    for s in candidates[1:]:
        if s.magnitude > best.magnitude or (s.magnitude == best.magnitude and s.start_date < best.start_date):
            best = s
    return best


def filter_aftershocks(
    shocks: Sequence[Shock],
    mainshock: Shock,
    window_end: date,
    threshold_ratio: float = 0.07,
) -> list[Shock]:
    """Shocks starting after the mainshock's trough and no later than ``window_end``
    whose magnitude is at least ``threshold_ratio`` times the mainshock's.

    The comparison is inclusive and made on magnitudes, not percentage falls.
    A relative slack of ``BOUNDARY_RTOL`` absorbs rounding in the product
    (``0.07 * 0.10`` is ``0.007000000000000001``).
    """
    if not 0 < threshold_ratio < 1:
        raise ValueError(f"threshold_ratio must lie in (0, 1), got {threshold_ratio}")
    if window_end <= mainshock.end_date:
        raise ValueError("window_end must fall after the mainshock trough")
    cutoff = threshold_ratio * mainshock.magnitude * (1.0 - BOUNDARY_RTOL)
    out = [
        s
        for s in shocks
        if mainshock.end_date < s.start_date <= window_end and s.magnitude >= cutoff and s != mainshock
    ]
    out.sort(key=lambda s: s.start_date)
    return out


def write_shocks_csv(shocks: Sequence[Shock], fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(SHOCK_FIELDS)
    for s in shocks:
        d = s.to_dict()
        writer.writerow([d["start_date"], d["end_date"]] + [repr(d[k]) for k in SHOCK_FIELDS[2:]])


def shocks_to_csv(shocks: Sequence[Shock]) -> str:
    buf = io.StringIO()
    write_shocks_csv(shocks, buf)
    return buf.getvalue()


def shocks_to_json(shocks: Sequence[Shock]) -> str:
    return json.dumps([s.to_dict() for s in shocks], indent=2)
