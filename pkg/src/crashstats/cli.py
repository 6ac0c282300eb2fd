"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 infeasible analysis.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .breakpoints import optimal_partition, trimming
from .errors import CrashStatsError, InfeasibleError, InputError
from .market_data import CsvSchema, PriceSeries, load_csv, parse_date, save_csv, to_csv_text
from .powerlaw import cumulative_counts, fit_gr
from .report import AnalysisConfig, analyze, batch, emit_plot_data, table_csv, table_text
from .shocks import detect_shocks, shocks_to_csv, shocks_to_json
from .synth import SynthSpec, generate

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2

log = logging.getLogger("crashstats")


def _window(text: str | None) -> tuple[date, date] | None:
    if not text:
        return None
    lo, sep, hi = text.partition(":")
    if not sep:
        raise InputError(f"--window expects <start>:<end>, got {text!r}")
    try:
        return (parse_date(lo) if lo else date.min, parse_date(hi) if hi else date.max)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _load(args) -> PriceSeries:
    schema = CsvSchema.parse(args.schema) if args.schema else None
    return load_csv(args.input, schema, ticker=args.ticker)


def _config(args) -> AnalysisConfig:
    return AnalysisConfig(
        threshold_ratio=args.threshold,
        m=args.breaks,
        h_min_fraction=args.min_seg,
        bin_width_days=args.bin_days,
        per_event_points=args.per_event_points,
        include_mainshock=args.include_mainshock,
        log_price_breaks=args.log_breaks,
    )


def _emit(text: str, out: Path | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8", newline="\n")


def cmd_analyze(args) -> int:
    series = _load(args)
    report = analyze(series, _config(args), _window(args.window), crisis_label=args.label)
    row = report.table_row()
    if args.format == "json":
        text = report.to_json()
    elif args.format == "csv":
        text = table_csv([row])
    else:
        text = table_text([row])
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        _emit(report.to_json(), out, "report.json")
        _emit(table_csv([row]), out, "report.csv")
        _emit(shocks_to_csv(report.artifacts.aftershocks), out, "aftershocks.csv")
        if report.artifacts.points:
            emit_plot_data(report, out)
    return EXIT_OK


def cmd_batch(args) -> int:
    rows = batch(args.manifest, _config(args), jobs=args.jobs)
    table_rows = [r.table_row() for r in rows]
    if args.format == "json":
        text = json.dumps(
            [r.report.to_dict() if r.report else {"ticker": r.entry.ticker, "status": "failed", "error": r.error} for r in rows],
            indent=2,
        ) + "\n"
    elif args.format == "csv":
        text = table_csv(table_rows)
    else:
        text = table_text(table_rows)
    sys.stdout.write(text)
    if args.out:
        _emit(table_csv(table_rows), Path(args.out), "table.csv")
    failed = sum(not r.ok for r in rows)
    if failed:
        log.warning("%d of %d rows failed", failed, len(rows))
    return EXIT_OK


def cmd_breaks(args) -> int:
    series = _load(args)
    y = np.log10(series.values) if args.log_breaks else series.values
    result = optimal_partition(y, args.breaks, trimming(len(series), args.min_seg), dates=series.dates)
    if args.format == "json":
        text = json.dumps(result.to_dict(), indent=2) + "\n"
    else:
        lines = ["break_index,break_date"] + [f"{i},{d.isoformat()}" for i, d in zip(result.break_indices, result.break_dates)]
        text = "\n".join(lines) + "\n"
    _emit(text, Path(args.out) if args.out else None, "breaks." + ("json" if args.format == "json" else "csv"))
    return EXIT_OK


def cmd_shocks(args) -> int:
    series = _load(args)
    found = detect_shocks(series)
    text = shocks_to_json(found) + "\n" if args.format == "json" else shocks_to_csv(found)
    _emit(text, Path(args.out) if args.out else None, "shocks." + ("json" if args.format == "json" else "csv"))
    return EXIT_OK


def _read_magnitudes(path: str) -> list[float]:
    try:
        with open(path, encoding="utf-8-sig", newline="") as fp:
            reader = csv.DictReader(fp)
            if not reader.fieldnames or "magnitude" not in reader.fieldnames:
                raise InputError("grfit input needs a 'magnitude' column")
            return [float(r["magnitude"]) for r in reader if r["magnitude"].strip()]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_grfit(args) -> int:
    mags = _read_magnitudes(args.input)
    points = cumulative_counts(mags, per_event=args.per_event_points)
    try:
        fit = fit_gr(points)
    except InputError as exc:
        raise InfeasibleError(str(exc)) from None
    if args.format == "json":
        text = json.dumps(fit.to_dict(), indent=2) + "\n"
    else:
        text = "magnitude,count,log10_count\n" + "".join(
            f"{p.magnitude!r},{p.count},{p.log_count!r}\n" for p in points
        )
    _emit(text, Path(args.out) if args.out else None, "gr_fit." + ("json" if args.format == "json" else "csv"))
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SynthSpec.from_json(args.spec)
    if args.seed is not None:
        spec = SynthSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    series = generate(spec)
    if args.out:
        out = Path(args.out)
        if out.suffix.lower() == ".csv":
            out.parent.mkdir(parents=True, exist_ok=True)
            save_csv(series, out)
        else:
            out.mkdir(parents=True, exist_ok=True)
            save_csv(series, out / "synthetic.csv")
    else:
        sys.stdout.write(to_csv_text(series))
    return EXIT_OK


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", required=True, help="price CSV")
    p.add_argument("--schema", help="column mapping, e.g. date=Date,close=Adj Close")
    p.add_argument("--ticker", help="identifier for reports (default: file stem)")


def _add_analysis(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float, default=0.07, help="aftershock threshold as a fraction of the mainshock magnitude")
    p.add_argument("--breaks", type=int, default=3, help="number of structural breaks")
    p.add_argument("--min-seg", type=float, default=0.10, help="minimum segment length as a fraction of the sample")
    p.add_argument("--bin-days", type=int, default=20, help="trading days per aftershock-rate bin")
    p.add_argument("--per-event-points", action="store_true", help="one G-R point per aftershock instead of per distinct magnitude")
    p.add_argument("--include-mainshock", action="store_true", help="add the mainshock to the fitted magnitudes")
    p.add_argument("--log-breaks", action="store_true", help="estimate breaks on log10 closes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crashstats", description="Crash mainshock/aftershock statistics from daily closes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline on one series")
    _add_input(p)
    _add_analysis(p)
    p.add_argument("--window", help="mainshock search window <start>:<end>")
    p.add_argument("--label", default="", help="crisis label echoed in the report")
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")
    p.add_argument("--out", help="directory for report.json, report.csv, aftershocks.csv and plot data")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("batch", help="analyse every row of a manifest")
    p.add_argument("--manifest", "--input", "-i", dest="manifest", required=True, help="manifest CSV (ticker,path[,crisis,window_start,window_end,date_col,close_col])")
    _add_analysis(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")
    p.add_argument("--out", help="directory for table.csv")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("breaks", help="structural breaks of the close series")
    _add_input(p)
    p.add_argument("--breaks", type=int, default=3)
    p.add_argument("--min-seg", type=float, default=0.10)
    p.add_argument("--log-breaks", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_breaks)

    p = sub.add_parser("shocks", help="list every consecutive-decline run")
    _add_input(p)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_shocks)

    p = sub.add_parser("grfit", help="G-R fit of a magnitude column")
    p.add_argument("--input", "-i", required=True, help="CSV with a 'magnitude' column (e.g. aftershocks.csv)")
    p.add_argument("--per-event-points", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_grfit)

    p = sub.add_parser("synth", help="generate a synthetic price series from a JSON spec")
    p.add_argument("--spec", required=True, help="SynthSpec JSON file")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--out", help="output .csv file or directory (default: stdout)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, CrashStatsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
