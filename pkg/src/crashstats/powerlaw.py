"""Gutenberg-Richter magnitude-frequency fit and aftershock rate series.

The fitted law is ``log10 N(M) = alpha - beta * M`` where ``N(M)`` counts the
shocks with magnitude at least ``M``.  The line is an ordinary least-squares
fit on the ``(M, log10 N)`` points.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .shocks import Shock


@dataclass(frozen=True)
class GrPoint:
    magnitude: float
    count: int
    log_count: float


@dataclass(frozen=True)
class GrFit:
    """OLS line through the cumulative counts.

    ``residuals`` are ``log_count - (alpha - beta * magnitude)`` per point.
    ``flags`` carries warnings such as ``"non_positive_beta"``; a flagged fit
    is still returned.
    """

    alpha: float
    beta: float
    r_squared: float
    points: tuple[GrPoint, ...]
    residuals: tuple[float, ...]
    flags: tuple[str, ...] = ()

    @property
    def n_points(self) -> int:
        return len(self.points)

    def predict(self, magnitude: float) -> float:
        return self.alpha - self.beta * magnitude

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class RateSeries:
    """Aftershock counts per block of ``bin_width_days`` trading days.

    ``last_bin_partial`` is set when the final bin covers fewer trading days
    than the others.
    """

    bin_start_dates: tuple[date, ...]
    counts: tuple[int, ...]
    bin_width_days: int
    last_bin_partial: bool = False

    @property
    def total(self) -> int:
        return sum(self.counts)


def cumulative_counts(magnitudes: Iterable[float], per_event: bool = False) -> list[GrPoint]:
    """Cumulative magnitude-frequency points, ordered by increasing magnitude.

    One point per distinct magnitude by default; ``per_event=True`` emits
    one point per input value instead (tied values repeat the same point).
    """
    mags = np.asarray(list(magnitudes), dtype=float)
    if mags.size == 0:
        raise InputError("no magnitudes to count")
    if not np.all(np.isfinite(mags)) or np.any(mags <= 0):
        raise InputError("magnitudes must be positive and finite")
    ordered = np.sort(mags)
    xs = ordered if per_event else np.unique(ordered)
    # count of values >= x in an ascending array
    counts = len(ordered) - np.searchsorted(ordered, xs, side="left")
    return [GrPoint(float(x), int(c), math.log10(int(c))) for x, c in zip(xs, counts)]


def fit_gr(points: Sequence[GrPoint]) -> GrFit:
    """Least-squares ``log10 N = alpha - beta * M`` through ``points``.

    Needs at least three points spanning two or more distinct magnitudes.
    """
    if len(points) < 3:
        raise InputError(f"need at least 3 points for a G-R fit, got {len(points)}")
    x = np.array([p.magnitude for p in points], dtype=float)
    y = np.array([p.log_count for p in points], dtype=float)
    if np.all(x == x[0]):
        raise InputError("all magnitudes identical; slope undefined")

    x_mean, y_mean = x.mean(), y.mean()
    dx = x - x_mean
    slope = float(np.dot(dx, y - y_mean) / np.dot(dx, dx))
    intercept = float(y_mean - slope * x_mean)
    residuals = y - (intercept + slope * x)
    ss_res = float(np.dot(residuals, residuals))
    ss_tot = float(np.dot(y - y_mean, y - y_mean))
    if ss_tot > 0:
        r_squared = 1.0 - ss_res / ss_tot
    else:
        r_squared = 1.0 if ss_res == 0 else 0.0

    beta = -slope
    flags = ("non_positive_beta",) if beta <= 0 else ()
    return GrFit(
        alpha=intercept,
        beta=beta,
        r_squared=r_squared,
        points=tuple(points),
        residuals=tuple(residuals.tolist()),
        flags=flags,
    )


def temporal_rate(aftershocks: Sequence[Shock], window: Sequence[date], bin_width_days: int = 20) -> RateSeries:
    """Bin aftershocks by start date into consecutive blocks of trading days.

    ``window`` is the ordered list of trading dates the bins tile.  Shocks
    starting outside it are ignored.
    """
    if bin_width_days < 1:
        raise ValueError("bin_width_days must be >= 1")
    days = list(window)
    if not days:
        raise InputError("empty rate window")
    n_bins = -(-len(days) // bin_width_days)
    counts = [0] * n_bins
    for s in aftershocks:
        if not days[0] <= s.start_date <= days[-1]:
            continue
        pos = bisect_right(days, s.start_date) - 1
        counts[pos // bin_width_days] += 1
    starts = tuple(days[b * bin_width_days] for b in range(n_bins))
    return RateSeries(
        bin_start_dates=starts,
        counts=tuple(counts),
        bin_width_days=bin_width_days,
        last_bin_partial=len(days) % bin_width_days != 0,
    )
