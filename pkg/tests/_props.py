"""Property checks shared by the hypothesis suite and the acceptance sweep.

Each ``check_*`` takes concrete inputs and raises ``AssertionError`` on a
violation.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from crashstats import (
    AnalysisConfig,
    CrashStatsError,
    analyze,
    brute_force_partition,
    cumulative_counts,
    detect_shocks,
    filter_aftershocks,
    fit_gr,
    identify_mainshock,
    load_csv,
    log_returns,
    optimal_partition,
    save_csv,
)
from crashstats.market_data import from_closes
from crashstats.powerlaw import GrPoint


def check_return_window_sums(closes, lo: int, hi: int) -> None:
    s = from_closes(closes)
    r = log_returns(s).values
    assert len(r) == len(closes) - 1
    total = math.fsum(r[lo:hi])
    exact = math.log10(closes[hi] / closes[lo])
    assert abs(total - exact) <= 1e-12 * abs(exact) + 1e-14 * (hi - lo + 1)


def check_returns_reconstruct(closes) -> None:
    s = from_closes(closes)
    r = np.asarray(log_returns(s).values)
    rebuilt = closes[0] * 10 ** np.concatenate([[0.0], np.cumsum(r)])
    np.testing.assert_allclose(rebuilt, closes, rtol=1e-10)


def check_save_load(closes, tmp: Path) -> None:
    s = from_closes(closes, ticker="t")
    path = tmp / "rt.csv"
    save_csv(s, path)
    back = load_csv(path, ticker="t")
    assert back.dates == s.dates and back.closes == s.closes
    first = path.read_bytes()
    save_csv(back, path)
    assert path.read_bytes() == first


def check_partition(closes) -> None:
    s = from_closes(closes)
    shocks = detect_shocks(s)
    covered = [0] * len(closes)
    for x in shocks:
        for t in range(x.start_index + 1, x.end_index + 1):
            covered[t] += 1
    for t in range(1, len(closes)):
        assert covered[t] == (1 if closes[t] < closes[t - 1] else 0)
    for a, b in zip(shocks, shocks[1:]):
        assert a.end_index <= b.start_index and a.start_date < b.start_date
    for x in shocks:
        seg = closes[x.start_index : x.end_index + 1]
        assert all(u > v for u, v in zip(seg, seg[1:]))
        assert x.start_index == 0 or closes[x.start_index - 1] <= closes[x.start_index]
        assert x.end_index == len(closes) - 1 or closes[x.end_index + 1] >= closes[x.end_index]
        assert x.duration_days >= 1 and x.magnitude > 0


def check_magnitude_additivity(closes) -> None:
    s = from_closes(closes)
    r = log_returns(s).values
    for x in detect_shocks(s):
        run = -math.fsum(r[x.start_index : x.end_index])
        assert abs(x.magnitude - run) <= 1e-12 * x.magnitude + 1e-15 * x.duration_days
        assert abs(x.pct_fall - (1 - 10**-x.magnitude)) <= 1e-9


def check_scale_invariance(closes, c: float) -> None:
    a = detect_shocks(from_closes(closes))
    b = detect_shocks(from_closes([c * v for v in closes]))
    # scaling must not reorder any pair of closes (guaranteed when closes are spread out)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert (x.start_date, x.end_date, x.duration_days) == (y.start_date, y.end_date, y.duration_days)
        assert math.isclose(x.magnitude, y.magnitude, rel_tol=1e-9, abs_tol=1e-12)
        assert math.isclose(x.pct_fall, y.pct_fall, rel_tol=1e-9, abs_tol=1e-12)


def check_threshold_monotone(closes, r1: float, r2: float) -> None:
    lo, hi = sorted((r1, r2))
    s = from_closes(closes)
    shocks = detect_shocks(s)
    if not shocks:
        return
    main = identify_mainshock(shocks)
    if main.end_date >= s.dates[-1]:
        return
    kept_lo = filter_aftershocks(shocks, main, s.dates[-1], lo)
    kept_hi = filter_aftershocks(shocks, main, s.dates[-1], hi)
    assert set(kept_hi) <= set(kept_lo)
    assert all(x.magnitude <= main.magnitude for x in kept_lo)


def check_dp_matches_brute_force(y, m: int, h: int) -> None:
    dp, bf = optimal_partition(y, m, h), brute_force_partition(y, m, h)
    assert dp.total_ssr == bf.total_ssr
    assert dp.break_indices == bf.break_indices
    assert dp.per_m_ssr == bf.per_m_ssr


def check_per_m_monotone(y, m: int, h: int) -> None:
    """An extra break never raises the minimum SSR when it has room to go.

    With trimming the claim needs a caveat: if no segment of the ``q``-break
    optimum is long enough to split (``>= 2h``), the ``q + 1`` minimum can be
    larger.  Without trimming (``h = 1``) monotonicity is unconditional.
    """
    r = optimal_partition(y, m, h)
    assert all(hi - lo >= h for lo, hi in zip((-1, *r.break_indices), (*r.break_indices, len(y) - 1)))
    for q in range(m):
        a, b = r.per_m_ssr[q], r.per_m_ssr[q + 1]
        segs = optimal_partition(y, q, h).segments()
        if h == 1 or any(j - i + 1 >= 2 * h for i, j in segs):
            assert b <= a + 1e-12 * max(1.0, a), (q, a, b)
    free = optimal_partition(y, min(m, len(y) - 1), 1).per_m_ssr
    assert all(b <= a + 1e-12 * max(1.0, a) for a, b in zip(free, free[1:]))


def _unique_optimum(y, m: int, h: int, rel_gap: float = 1e-6) -> bool:
    """True when the best partition beats every other by a clear margin."""
    from itertools import combinations

    n = len(y)
    y = np.asarray(y, dtype=float)
    totals = []
    for combo in combinations(range(h - 1, n - h), m):
        b = (-1, *combo, n - 1)
        if any(q - p < h for p, q in zip(b, b[1:])):
            continue
        totals.append(sum(float(np.sum((y[p + 1 : q + 1] - y[p + 1 : q + 1].mean()) ** 2)) for p, q in zip(b, b[1:])))
    totals.sort()
    return len(totals) < 2 or totals[1] - totals[0] > rel_gap * max(1.0, totals[0])


def check_affine_equivariance(y, m: int, h: int, a: float, b: float) -> None:
    y = np.asarray(y, dtype=float)
    base = optimal_partition(y, m, h)
    moved = optimal_partition(a * y + b, m, h)
    if _unique_optimum(y, m, h):
        assert moved.break_indices == base.break_indices
    assert math.isclose(moved.total_ssr, a * a * base.total_ssr, rel_tol=1e-7, abs_tol=1e-9 * max(1.0, a * a))


def check_reversal(y, m: int, h: int) -> None:
    y = np.asarray(y, dtype=float)
    if not _unique_optimum(y, m, h):
        return
    n = len(y)
    fwd = optimal_partition(y, m, h).break_indices
    rev = optimal_partition(y[::-1], m, h).break_indices
    assert tuple(sorted(n - 2 - k for k in rev)) == fwd


def check_counts_permutation(mags, seed: int) -> None:
    perm = np.random.default_rng(seed).permutation(len(mags))
    shuffled = [mags[i] for i in perm]
    assert cumulative_counts(mags) == cumulative_counts(shuffled)
    assert cumulative_counts(mags, per_event=True) == cumulative_counts(shuffled, per_event=True)
    pts = cumulative_counts(mags)
    assert all(p.count >= 1 for p in pts)
    assert all(a.count > b.count and a.magnitude < b.magnitude for a, b in zip(pts, pts[1:]))


def check_exact_line(alpha: float, beta: float, mags) -> None:
    pts = [GrPoint(m, 1, alpha - beta * m) for m in sorted(set(mags))]
    fit = fit_gr(pts)
    assert abs(fit.alpha - alpha) <= 1e-10 * max(1.0, abs(alpha))
    assert abs(fit.beta - beta) <= 1e-10 * max(1.0, abs(beta))


def check_append_extreme(mags, delta: float) -> None:
    """Counts are of magnitudes ``>= M``.

    A new value below the minimum adds one point (count ``n + 1``) and leaves
    every existing point alone; a new value above the maximum raises every
    existing count by one.  Either way count differences between existing
    points are unchanged.
    """
    before = cumulative_counts(mags)
    low = min(mags) - delta
    after = cumulative_counts([*mags, low])
    assert (after[0].magnitude, after[0].count) == (low, len(mags) + 1)
    assert after[1:] == before

    high = max(mags) + delta
    after = cumulative_counts([*mags, high])
    assert (after[-1].magnitude, after[-1].count) == (high, 1)
    assert [(p.magnitude, p.count + 1) for p in before] == [(p.magnitude, p.count) for p in after[:-1]]
    diffs = [a.count - b.count for a, b in zip(before, before[1:])]
    assert diffs == [a.count - b.count for a, b in zip(after[:-1], after[1:-1])]


def check_residuals_sum_zero(mags) -> None:
    pts = cumulative_counts(mags)
    if len(pts) < 3:
        return
    assert abs(math.fsum(fit_gr(pts).residuals)) < 1e-9


def check_report_determinism(closes, config: AnalysisConfig | None = None) -> None:
    s = from_closes(closes, ticker="det")
    try:
        first = analyze(s, config).to_json()
    except CrashStatsError as exc:  # infeasible inputs must fail identically too
        try:
            analyze(s, config)
        except CrashStatsError as again:
            assert type(again) is type(exc) and str(again) == str(exc)
            return
        raise AssertionError("second run succeeded where the first failed")
    assert analyze(s, config).to_json() == first
