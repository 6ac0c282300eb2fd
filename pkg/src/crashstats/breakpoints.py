"""Multiple structural breaks in the mean, by global least squares.

Each segment of ``y`` is fitted with its own constant (a pure mean-shift
model), and the break dates are the partition minimising the total sum of
squared residuals, found exactly by dynamic programming over segment SSRs.
The crisis influence window is read off the break dates nearest the
mainshock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InfeasibleError, InputError
from .market_data import PriceSeries
from .shocks import Shock


@dataclass(frozen=True)
class SegmentStats:
    start_index: int
    end_index: int
    ssr: float
    mean: float


class SegmentCosts:
    """Constant-mean SSR for any segment ``y[i..j]`` (inclusive) in O(1).

    Uses prefix sums of the centred series, ``ssr = sum(y^2) - (sum y)^2 / n``.
    Segments whose values are all equal return exactly 0 (checked with a
    run-length table, not by trusting the cancellation).
    """

    def __init__(self, y: Sequence[float]) -> None:
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or len(y) == 0:
            raise InputError("y must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(y)):
            raise InputError("y contains non-finite values")
        self.y = y
        self.n = len(y)
        self._shift = float(y.mean())
        yc = y - self._shift
        self._s = np.concatenate(([0.0], np.cumsum(yc)))
        self._q = np.concatenate(([0.0], np.cumsum(yc * yc)))
        # run_start[j]: first index of the run of equal values ending at j
        run_start = np.zeros(self.n, dtype=np.int64)
        for j in range(1, self.n):
            run_start[j] = run_start[j - 1] if y[j] == y[j - 1] else j
        self._run_start = run_start

    def ssr_many(self, i, j) -> np.ndarray:
        """Vectorised SSR for index arrays ``i``, ``j`` (broadcast together)."""
        i, j = np.broadcast_arrays(np.asarray(i, dtype=np.int64), np.asarray(j, dtype=np.int64))
        k = (j - i + 1).astype(float)
        s = self._s[j + 1] - self._s[i]
        v = (self._q[j + 1] - self._q[i]) - s * s / k
        constant = self._run_start[j] <= i
        v = np.where(constant, 0.0, v)
        bad = (~constant) & (v <= 0.0)
        if np.any(bad):
            # cancellation swallowed a tiny but real spread
            v = np.array(v, dtype=float)
            for idx in zip(*np.nonzero(bad)):
                seg = self.y[i[idx] : j[idx] + 1]
                v[idx] = float(np.sum((seg - seg.mean()) ** 2))
        return v

    def ssr(self, i: int, j: int) -> float:
        if not 0 <= i <= j < self.n:
            raise IndexError(f"segment [{i}, {j}] outside 0..{self.n - 1}")
        return float(self.ssr_many([i], [j])[0])

    def mean(self, i: int, j: int) -> float:
        return self._shift + float(self._s[j + 1] - self._s[i]) / (j - i + 1)

    def stats(self, i: int, j: int) -> SegmentStats:
        return SegmentStats(i, j, self.ssr(i, j), self.mean(i, j))


def segment_ssr_table(y: Sequence[float], h_min: int) -> SegmentCosts:
    """SSR provider for ``y``; requires room for at least two segments of ``h_min``."""
    if h_min < 1:
        raise ValueError("h_min must be >= 1")
    if len(y) < 2 * h_min:
        raise InfeasibleError(f"series of length {len(y)} shorter than 2*h_min = {2 * h_min}")
    return SegmentCosts(y)


@dataclass(frozen=True)
class BreakResult:
    """Optimal ``m``-break partition.

    ``break_indices[k]`` is the last observation of segment ``k``; the
    matching date is ``break_dates[k]``.  ``per_m_ssr[q]`` is the minimal
    SSR with ``q`` breaks for ``q = 0..m``.
    """

    m: int
    break_indices: tuple[int, ...]
    total_ssr: float
    per_m_ssr: tuple[float, ...]
    h_min: int
    n: int
    break_dates: tuple[date, ...] | None = None
    open_ended: bool = False

    def segments(self) -> list[tuple[int, int]]:
        bounds = [-1, *self.break_indices, self.n - 1]
        return [(a + 1, b) for a, b in zip(bounds, bounds[1:])]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "break_dates": [d.isoformat() for d in self.break_dates] if self.break_dates is not None else None,
            "break_indices": list(self.break_indices),
            "total_ssr": self.total_ssr,
            "per_m_ssr": list(self.per_m_ssr),
            "h_min": self.h_min,
            "open_ended": self.open_ended,
        }


def _check_partition_args(n: int, m: int, h_min: int) -> None:
    if m < 0:
        raise ValueError("m must be >= 0")
    if h_min < 1:
        raise ValueError("h_min must be >= 1")
    if (m + 1) * h_min > n:
        raise InfeasibleError(f"{m} breaks with h_min={h_min} need {(m + 1) * h_min} observations, have {n}")


def optimal_partition(
    y: Sequence[float],
    m: int,
    h_min: int,
    dates: Sequence[date] | None = None,
    costs: SegmentCosts | None = None,
) -> BreakResult:
    """Globally SSR-minimising partition of ``y`` into ``m + 1`` segments.

    The recursion ``best(k, s) = min_j ssr(s, j) + best(k - 1, j + 1)`` is run
    over suffixes ``y[s:]`` so the break vector can be rebuilt left to right,
    always taking the smallest optimal ``j``.  Among exactly tied optima this
    returns the lexicographically smallest break-index vector.
    """
    costs = costs or SegmentCosts(y)
    n = costs.n
    _check_partition_args(n, m, h_min)

    best = np.full((m + 1, n + 1), np.inf)
    choice = np.full((m + 1, n + 1), -1, dtype=np.int64)
    starts = np.arange(0, n - h_min + 1)
    best[0, starts] = costs.ssr_many(starts, n - 1)
    for k in range(1, m + 1):
        for s in range(0, n - (k + 1) * h_min + 1):
            js = np.arange(s + h_min - 1, n - k * h_min)
            vals = costs.ssr_many(s, js) + best[k - 1, js + 1]
            pick = int(np.argmin(vals))
            best[k, s] = vals[pick]
            choice[k, s] = js[pick]

    breaks: list[int] = []
    s = 0
    for k in range(m, 0, -1):
        j = int(choice[k, s])
        breaks.append(j)
        s = j + 1
    return BreakResult(
        m=m,
        break_indices=tuple(breaks),
        total_ssr=float(best[m, 0]),
        per_m_ssr=tuple(float(best[q, 0]) for q in range(m + 1)),
        h_min=h_min,
        n=n,
        break_dates=tuple(dates[b] for b in breaks) if dates is not None else None,
    )


class InfluenceWindow(NamedTuple):
    window_start: date
    window_end: date
    breaks: BreakResult
    open_ended: bool


def trimming(n: int, h_min_fraction: float) -> int:
    """Minimum segment length: ``h_min_fraction * n`` rounded half-up, floor 2."""
    if not 0 < h_min_fraction < 1:
        raise ValueError("h_min_fraction must lie in (0, 1)")
    return max(2, int(math.floor(h_min_fraction * n + 0.5)))


def influence_window(
    series: PriceSeries,
    mainshock: Shock,
    m: int = 3,
    h_min_fraction: float = 0.10,
    log_price: bool = False,
) -> InfluenceWindow:
    """Bracket the mainshock's influence between two structural breaks.

    Breaks are estimated on the close series (or ``log10`` closes).  The
    window opens at the break nearest the mainshock's peak and closes at the
    next break; when no break follows, it runs to the end of the series and
    is flagged open-ended.
    """
    n = len(series)
    if mainshock.start_index < 0 or mainshock.start_index >= n or series.dates[mainshock.start_index] != mainshock.start_date:
        try:
            start_idx = series.index_of(mainshock.start_date)
        except KeyError:
            raise InputError("mainshock does not lie within the series") from None
    else:
        start_idx = mainshock.start_index

    h = trimming(n, h_min_fraction)
    y = np.log10(series.values) if log_price else series.values
    result = optimal_partition(y, m, h, dates=series.dates)
    if not result.break_indices:
        raise InfeasibleError("no breaks estimated (m = 0)")

    nearest = min(result.break_indices, key=lambda b: (abs(b - start_idx), b))
    if abs(nearest - start_idx) > 0.25 * n:
        raise InfeasibleError(
            f"nearest break ({series.dates[nearest]}) is more than 25% of the sample from the mainshock; "
            "the crash is not the dominant structure, widen the data range"
        )
    later = [b for b in result.break_indices if b > nearest]
    open_ended = not later
    end_idx = later[0] if later else n - 1
    result = replace(result, open_ended=open_ended)
    return InfluenceWindow(series.dates[nearest], series.dates[end_idx], result, open_ended)
