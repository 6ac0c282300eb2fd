"""Synthetic ground truth: planted series, G-R samples and brute-force references.

Everything here is deterministic given a seed and is meant to check the
production code paths from an independent direction.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

from .breakpoints import BreakResult, SegmentCosts, _check_partition_args
from .errors import InfeasibleError, InputError
from .market_data import PriceSeries, from_closes

BRUTE_FORCE_MAX_N = 40


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for :func:`generate`.

    ``drift`` and ``volatility`` are the mean and standard deviation of the
    daily base-10 log return of the background walk.  ``planted_breaks`` are
    ``(index, level)`` pairs: from ``index`` on, the walk is centred on
    ``level`` instead of the previous level.  ``planted_shocks`` are
    ``(start_index, magnitude, duration)``: the close at ``start_index`` is
    the peak and the next ``duration`` closes fall by equal log steps that
    add up to ``magnitude``.
    """

    n_days: int
    base_price: float = 100.0
    drift: float = 0.0
    volatility: float = 0.0
    planted_breaks: tuple[tuple[int, float], ...] = ()
    planted_shocks: tuple[tuple[int, float, int], ...] = ()
    seed: int = 0
    start_date: date = date(2000, 1, 3)
    ticker: str = "synthetic"

    def __post_init__(self) -> None:
        object.__setattr__(self, "planted_breaks", tuple((int(i), float(v)) for i, v in self.planted_breaks))
        object.__setattr__(
            self, "planted_shocks", tuple((int(s), float(m), int(d)) for s, m, d in self.planted_shocks)
        )
        if isinstance(self.start_date, str):
            object.__setattr__(self, "start_date", date.fromisoformat(self.start_date))

    def validate(self) -> None:
        if self.n_days < 2:
            raise InputError("n_days must be >= 2")
        if not self.base_price > 0:
            raise InputError("base_price must be positive")
        if self.volatility < 0:
            raise InputError("volatility must be >= 0")
        for idx, level in self.planted_breaks:
            if not 1 <= idx < self.n_days:
                raise InputError(f"break index {idx} out of range")
            if not level > 0:
                raise InputError("break levels must be positive")
        prev_end = -1
        for start, mag, dur in sorted(self.planted_shocks):
            if not mag > 0:
                raise InputError("planted shock magnitudes must be positive")
            if dur < 1:
                raise InputError("planted shock duration must be >= 1")
            if start < 0 or start + dur > self.n_days - 1:
                raise InputError(f"planted shock at {start} runs past the series end")
            if start <= prev_end:
                raise InputError(f"planted shock at {start} overlaps the previous one")
            for idx, _ in self.planted_breaks:
                if start < idx <= start + dur:
                    raise InputError(f"break at {idx} falls inside the shock starting at {start}")
            prev_end = start + dur

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown SynthSpec fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "SynthSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read synth spec {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["start_date"] = self.start_date.isoformat()
        d["planted_breaks"] = [list(b) for b in self.planted_breaks]
        d["planted_shocks"] = [list(s) for s in self.planted_shocks]
        return d


def generate(spec: SynthSpec) -> PriceSeries:
    """Price series for ``spec`` on consecutive business days.

    Noise is switched off on planted-shock days, so each planted shock is a
    strictly decreasing run of exactly its planted magnitude.
    """
    spec.validate()
    n = spec.n_days
    rng = np.random.default_rng(spec.seed)
    noise = spec.drift + spec.volatility * rng.standard_normal(n)
    noise[0] = 0.0

    level = np.full(n, math.log10(spec.base_price))
    for idx, new_level in sorted(spec.planted_breaks):
        level[idx:] = math.log10(new_level)

    shock_step = np.zeros(n)
    for start, mag, dur in spec.planted_shocks:
        noise[start + 1 : start + dur + 1] = 0.0
        shock_step[start + 1 : start + dur + 1] = -mag / dur

    log_price = level + np.cumsum(noise) + np.cumsum(shock_step)
    return from_closes(10.0**log_price, start=spec.start_date, ticker=spec.ticker)


def sample_gr_magnitudes(
    alpha: float | None,
    beta: float,
    n: int | None = None,
    m_min: float = 0.01,
    seed: int = 0,
) -> list[float]:
    """Magnitudes whose exceedance law is ``N(M) / N(m_min) = 10**(-beta * (M - m_min))``.

    Inverse-transform sampling.  If ``n`` is omitted it is taken from the
    law's own intercept, ``round(10**(alpha - beta * m_min))``; otherwise
    ``alpha`` is not used (the sample's intercept is then
    ``log10(n) + beta * m_min``).
    """
    if not beta > 0:
        raise InputError("beta must be positive")
    if not m_min > 0:
        raise InputError("m_min must be positive")
    if n is None:
        if alpha is None:
            raise InputError("need n or alpha")
        n = int(round(10 ** (alpha - beta * m_min)))
    if n < 1:
        raise InputError("n must be >= 1")
    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(n)  # (0, 1]
    return (m_min - np.log10(u) / beta).tolist()


def recursive_residual_ssr(y: Sequence[float], i: int, j: int) -> float:
    """Constant-mean SSR of ``y[i..j]`` accumulated from recursive residuals.

    ``SSR(i, t) = SSR(i, t-1) + v(i, t)**2`` with
    ``v(i, t) = (y_t - mean(y_i..y_{t-1})) * sqrt(k / (k + 1))``, ``k = t - i``.
    """
    total = 0.0
    mean = float(y[i])
    for t in range(i + 1, j + 1):
        k = t - i
        dev = float(y[t]) - mean
        total += dev * dev * k / (k + 1)
        mean += dev / (k + 1)
    return total


def _admissible(n: int, m: int, h_min: int):
    for combo in itertools.combinations(range(h_min - 1, n - h_min), m):
        bounds = (-1, *combo, n - 1)
        if all(b - a >= h_min for a, b in zip(bounds, bounds[1:])):
            yield combo


def _brute_min(table: np.ndarray, n: int, m: int, h_min: int) -> tuple[float, tuple[int, ...]]:
    best_total, best_combo = math.inf, ()
    for combo in _admissible(n, m, h_min):
        bounds = (-1, *combo, n - 1)
        segs = [(a + 1, b) for a, b in zip(bounds, bounds[1:])]
        # right fold, the association order used by optimal_partition
        total = table[segs[-1]]
        for seg in reversed(segs[:-1]):
            total = table[seg] + total
        if total < best_total:
            best_total, best_combo = total, combo
    return float(best_total), best_combo


def brute_force_partition(
    y: Sequence[float],
    m: int,
    h_min: int,
    dates: Sequence[date] | None = None,
) -> BreakResult:
    """Exhaustive search over every admissible ``m``-break partition.

    Returns the first minimum in lexicographic order of break indices.
    """
    n = len(y)
    if n > BRUTE_FORCE_MAX_N:
        raise InfeasibleError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    _check_partition_args(n, m, h_min)
    costs = SegmentCosts(y)
    ii, jj = np.triu_indices(n)
    table = np.full((n, n), np.nan)
    table[ii, jj] = costs.ssr_many(ii, jj)

    per_m = []
    combo: tuple[int, ...] = ()
    total = math.inf
    for q in range(m + 1):
        total, combo = _brute_min(table, n, q, h_min)
        per_m.append(total)
    return BreakResult(
        m=m,
        break_indices=tuple(int(b) for b in combo),
        total_ssr=total,
        per_m_ssr=tuple(per_m),
        h_min=h_min,
        n=n,
        break_dates=tuple(dates[b] for b in combo) if dates is not None else None,
    )
