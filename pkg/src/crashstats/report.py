"""End-to-end crisis analysis, batch tables and plot-ready data files."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Sequence

from .breakpoints import BreakResult, influence_window
from .errors import CrashStatsError, InfeasibleError, InputError, NoShocksError
from .market_data import CsvSchema, PriceSeries, load_csv, parse_date
from .powerlaw import GrFit, GrPoint, RateSeries, cumulative_counts, fit_gr, temporal_rate
from .shocks import Shock, detect_shocks, filter_aftershocks, identify_mainshock

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9

TABLE_COLUMNS = (
    "ticker",
    "crisis",
    "status",
    "pct_fall",
    "magnitude",
    "alpha",
    "beta",
    "r_squared",
    "n_aftershocks",
    "mainshock_start",
    "mainshock_end",
    "duration",
    "window_start",
    "window_end",
    "open_ended",
    "fit_status",
    "consistency_flag",
    "error",
)


@dataclass(frozen=True)
class AnalysisConfig:
    threshold_ratio: float = 0.07
    m: int = 3
    h_min_fraction: float = 0.10
    bin_width_days: int = 20
    per_event_points: bool = False
    include_mainshock: bool = False
    log_price_breaks: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.threshold_ratio < 1:
            raise InputError("threshold_ratio must lie in (0, 1)")
        if self.m < 1:
            raise InputError("m (number of breaks) must be >= 1")
        if not 0 < self.h_min_fraction < 0.5:
            raise InputError("h_min_fraction must lie in (0, 0.5)")
        if self.bin_width_days < 1:
            raise InputError("bin_width_days must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AnalysisArtifacts:
    """Intermediate results kept for plotting; never serialised with the report."""

    series: PriceSeries
    shocks: tuple[Shock, ...]
    mainshock: Shock
    aftershocks: tuple[Shock, ...]
    breaks: BreakResult
    points: tuple[GrPoint, ...]
    fit: GrFit | None
    rate: RateSeries


@dataclass(frozen=True)
class CrisisReport:
    """One crisis-table row plus diagnostics.

    ``consistency_flag`` is set when the mainshock's ``pct_fall`` disagrees
    with ``1 - 10**-magnitude``.  ``alpha``/``beta``/``r_squared`` are
    ``None`` unless ``fit_status == "ok"``.
    """

    ticker: str
    crisis_label: str
    price_field: str
    n_observations: int
    first_date: date
    last_date: date
    mainshock: Shock
    window_start: date
    window_end: date
    open_ended: bool
    break_dates: tuple[date, ...]
    n_shocks: int
    n_aftershocks: int
    n_points: int
    fit_status: str
    alpha: float | None
    beta: float | None
    r_squared: float | None
    fit_flags: tuple[str, ...]
    rate_counts: tuple[int, ...]
    consistency_flag: bool
    config: AnalysisConfig
    artifacts: AnalysisArtifacts | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "ticker": self.ticker,
            "crisis_label": self.crisis_label,
            "price_field": self.price_field,
            "n_observations": self.n_observations,
            "first_date": self.first_date.isoformat(),
            "last_date": self.last_date.isoformat(),
            "mainshock": self.mainshock.to_dict(),
            "window": {
                "start": self.window_start.isoformat(),
                "end": self.window_end.isoformat(),
                "open_ended": self.open_ended,
            },
            "break_dates": [d.isoformat() for d in self.break_dates],
            "n_shocks": self.n_shocks,
            "n_aftershocks": self.n_aftershocks,
            "fit": {
                "status": self.fit_status,
                "alpha": self.alpha,
                "beta": self.beta,
                "r_squared": self.r_squared,
                "n_points": self.n_points,
                "flags": list(self.fit_flags),
            },
            "rate": {"bin_width_days": self.config.bin_width_days, "counts": list(self.rate_counts)},
            "consistency_flag": self.consistency_flag,
            "config": self.config.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def table_row(self) -> dict:
        ms = self.mainshock
        return {
            "ticker": self.ticker,
            "crisis": self.crisis_label,
            "status": "ok",
            "pct_fall": 100.0 * ms.pct_fall,
            "magnitude": ms.magnitude,
            "alpha": self.alpha,
            "beta": self.beta,
            "r_squared": self.r_squared,
            "n_aftershocks": self.n_aftershocks,
            "mainshock_start": ms.start_date.isoformat(),
            "mainshock_end": ms.end_date.isoformat(),
            "duration": ms.duration_days,
            "window_start": self.window_start.isoformat(),
            "window_end": self.window_end.isoformat(),
            "open_ended": self.open_ended,
            "fit_status": self.fit_status,
            "consistency_flag": self.consistency_flag,
            "error": "",
        }


def identity_gap(pct_fall: float, magnitude: float) -> float:
    """``pct_fall - (1 - 10**-magnitude)``; zero for a self-consistent shock."""
    return pct_fall - (1.0 - 10.0 ** (-magnitude))


def analyze(
    series: PriceSeries,
    config: AnalysisConfig | None = None,
    search_window: tuple[date, date] | None = None,
    crisis_label: str = "",
) -> CrisisReport:
    """Run the full pipeline on one series.

    detect shocks -> mainshock -> break-bounded influence window ->
    aftershock filter -> cumulative counts -> G-R fit -> rate series.
    Too few aftershocks to fit gives a report with ``fit_status`` set and
    no coefficients rather than an error.
    """
    config = config or AnalysisConfig()
    if len(series) < 2:
        raise InputError("series too short")
    shocks = detect_shocks(series)
    if not shocks:
        raise NoShocksError("no shocks found")
    mainshock = identify_mainshock(shocks, search_window)
    window = influence_window(
        series,
        mainshock,
        m=config.m,
        h_min_fraction=config.h_min_fraction,
        log_price=config.log_price_breaks,
    )
    if window.window_end <= mainshock.end_date:
        raise InfeasibleError(
            f"influence window closes on {window.window_end}, before the mainshock trough {mainshock.end_date}"
        )
    aftershocks = filter_aftershocks(shocks, mainshock, window.window_end, config.threshold_ratio)

    mags = [s.magnitude for s in aftershocks]
    if config.include_mainshock:
        mags.append(mainshock.magnitude)
    points = cumulative_counts(mags, per_event=config.per_event_points) if mags else []

    fit: GrFit | None = None
    if not mags:
        fit_status = "no_aftershocks"
    elif len(points) < 3:
        fit_status = "too_few_points"
    else:
        try:
            fit = fit_gr(points)
            fit_status = "ok"
        except InputError:
            fit_status = "degenerate_magnitudes"

    rate_days = [d for d in series.dates if mainshock.end_date < d <= window.window_end]
    rate = temporal_rate(aftershocks, rate_days, config.bin_width_days)

    artifacts = AnalysisArtifacts(
        series=series,
        shocks=tuple(shocks),
        mainshock=mainshock,
        aftershocks=tuple(aftershocks),
        breaks=window.breaks,
        points=tuple(points),
        fit=fit,
        rate=rate,
    )
    return CrisisReport(
        ticker=series.ticker,
        crisis_label=crisis_label,
        price_field=series.price_field,
        n_observations=len(series),
        first_date=series.dates[0],
        last_date=series.dates[-1],
        mainshock=mainshock,
        window_start=window.window_start,
        window_end=window.window_end,
        open_ended=window.open_ended,
        break_dates=window.breaks.break_dates or (),
        n_shocks=len(shocks),
        n_aftershocks=len(aftershocks),
        n_points=len(points),
        fit_status=fit_status,
        alpha=fit.alpha if fit else None,
        beta=fit.beta if fit else None,
        r_squared=fit.r_squared if fit else None,
        fit_flags=fit.flags if fit else (),
        rate_counts=rate.counts,
        consistency_flag=abs(identity_gap(mainshock.pct_fall, mainshock.magnitude)) > IDENTITY_TOL,
        config=config,
        artifacts=artifacts,
    )


# ---------------------------------------------------------------------------
# batch
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestRow:
    ticker: str
    path: Path
    crisis: str = ""
    search_window: tuple[date, date] | None = None
    schema: CsvSchema = CsvSchema()


@dataclass(frozen=True)
class BatchRow:
    entry: ManifestRow
    report: CrisisReport | None
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.report is not None

    def table_row(self) -> dict:
        if self.report is not None:
            return self.report.table_row()
        row = {k: None for k in TABLE_COLUMNS}
        row.update(ticker=self.entry.ticker, crisis=self.entry.crisis, status="failed", error=self.error)
        return row


def read_manifest(path: str | Path) -> list[ManifestRow]:
    """Parse a batch manifest CSV.

    Required columns ``ticker,path``; optional ``crisis``, ``window_start``,
    ``window_end`` (mainshock search window), ``date_col``, ``close_col``.
    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc.strerror or exc}") from None
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or not {"ticker", "path"} <= set(reader.fieldnames):
        raise InputError("manifest needs at least 'ticker' and 'path' columns")
    rows = []
    for rec in reader:
        rec = {k: (v or "").strip() for k, v in rec.items() if k}
        window = None
        if rec.get("window_start") or rec.get("window_end"):
            lo = parse_date(rec["window_start"]) if rec.get("window_start") else date.min
            hi = parse_date(rec["window_end"]) if rec.get("window_end") else date.max
            window = (lo, hi)
        schema = CsvSchema(date=rec.get("date_col") or "date", close=rec.get("close_col") or "close")
        file_path = Path(rec["path"])
        if not file_path.is_absolute():
            file_path = path.parent / file_path
        rows.append(ManifestRow(rec["ticker"], file_path, rec.get("crisis", ""), window, schema))
    return rows


def _run_row(entry: ManifestRow, config: AnalysisConfig) -> BatchRow:
    try:
        series = load_csv(entry.path, entry.schema, ticker=entry.ticker)
        report = analyze(series, config, entry.search_window, crisis_label=entry.crisis)
        return BatchRow(entry, replace(report, artifacts=None))
    except (CrashStatsError, ValueError, OSError) as exc:
        logger.warning("batch row %s failed: %s", entry.ticker, exc)
        return BatchRow(entry, None, f"{type(exc).__name__}: {exc}")


def batch(manifest: str | Path, config: AnalysisConfig | None = None, jobs: int = 1) -> list[BatchRow]:
    """Analyse every manifest row; failures are recorded per row, never raised."""
    config = config or AnalysisConfig()
    entries = read_manifest(manifest)
    if jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_row, entries, [config] * len(entries)))
    return [_run_row(e, config) for e in entries]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def table_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in TABLE_COLUMNS])
    return buf.getvalue()


def table_text(rows: Sequence[dict]) -> str:
    """Human-readable crisis-table summary (rounded for display only)."""
    header = ("ticker", "crisis", "status", "%fall", "M", "alpha", "beta", "R2", "n_after", "window")
    lines = [header]
    for r in rows:
        def num(key, spec):
            v = r.get(key)
            return format(v, spec) if isinstance(v, (int, float)) and not isinstance(v, bool) else "-"

        window = f"{r['window_start']}..{r['window_end']}" if r.get("window_start") else r.get("error", "")
        lines.append(
            (
                str(r.get("ticker") or ""),
                str(r.get("crisis") or ""),
                str(r.get("status") or ""),
                num("pct_fall", ".1f"),
                num("magnitude", ".4f"),
                num("alpha", ".2f"),
                num("beta", ".1f"),
                num("r_squared", ".3f"),
                num("n_aftershocks", "d"),
                window,
            )
        )
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in lines) + "\n"


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------


def _write_rows(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fp:
        fp.write(",".join(header) + "\n")
        for row in rows:
            fp.write(",".join(_fmt(v) for v in row) + "\n")


def emit_plot_data(report: CrisisReport, out_dir: str | Path) -> list[Path]:
    """Write ``gr_points.csv``, ``gr_fit.csv``, ``price_with_breaks.csv`` and
    ``aftershock_rate.csv`` into ``out_dir``.

    ``gr_fit.csv`` holds the fitted line at the smallest and largest point
    magnitude; it has only a header when the fit did not succeed.
    """
    art = report.artifacts
    if art is None or not art.points:
        raise InfeasibleError("no magnitude-frequency points to plot")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / name for name in ("gr_points.csv", "gr_fit.csv", "price_with_breaks.csv", "aftershock_rate.csv")]
        _write_rows(paths[0], ("magnitude", "count", "log10_count"), ((p.magnitude, p.count, p.log_count) for p in art.points))
        fit_rows = []
        if art.fit is not None:
            lo, hi = art.points[0].magnitude, art.points[-1].magnitude
            fit_rows = [(lo, art.fit.predict(lo)), (hi, art.fit.predict(hi))]
        _write_rows(paths[1], ("magnitude", "log10_count"), fit_rows)
        breaks = set(art.breaks.break_indices)
        _write_rows(
            paths[2],
            ("date", "close", "is_break"),
            ((d.isoformat(), c, 1 if i in breaks else 0) for i, (d, c) in enumerate(zip(art.series.dates, art.series.closes))),
        )
        last = len(art.rate.counts) - 1
        _write_rows(
            paths[3],
            ("bin_start", "count", "partial"),
            (
                (d.isoformat(), n, 1 if (i == last and art.rate.last_bin_partial) else 0)
                for i, (d, n) in enumerate(zip(art.rate.bin_start_dates, art.rate.counts))
            ),
        )
    except OSError as exc:
        raise InputError(f"cannot write plot data to {out}: {exc.strerror or exc}") from None
    return paths
