"""Mainshock/aftershock statistics of stock-market crashes.

Daily closes are cut into consecutive-decline runs, the largest run is the
mainshock, structural breaks in the price level bound its influence window,
and the aftershocks inside that window are fitted with the
Gutenberg-Richter law ``log10 N(M) = alpha - beta * M``.
"""

__version__ = "0.1.0"

from .breakpoints import (
    BreakResult,
    InfluenceWindow,
    SegmentCosts,
    SegmentStats,
    influence_window,
    optimal_partition,
    segment_ssr_table,
)
from .errors import CrashStatsError, InfeasibleError, InputError, NoShocksError
from .market_data import (
    CsvSchema,
    PriceSeries,
    ReturnSeries,
    load_csv,
    log_returns,
    save_csv,
    slice_series,
)
from .powerlaw import GrFit, GrPoint, RateSeries, cumulative_counts, fit_gr, temporal_rate
from .report import AnalysisConfig, CrisisReport, analyze, batch, emit_plot_data
from .shocks import CrisisWindow, Shock, detect_shocks, filter_aftershocks, identify_mainshock
from .synth import SynthSpec, brute_force_partition, generate, sample_gr_magnitudes

__all__ = [
    "AnalysisConfig",
    "BreakResult",
    "CrashStatsError",
    "CrisisReport",
    "CrisisWindow",
    "CsvSchema",
    "GrFit",
    "GrPoint",
    "InfeasibleError",
    "InfluenceWindow",
    "InputError",
    "NoShocksError",
    "PriceSeries",
    "RateSeries",
    "ReturnSeries",
    "SegmentCosts",
    "SegmentStats",
    "Shock",
    "SynthSpec",
    "analyze",
    "batch",
    "brute_force_partition",
    "cumulative_counts",
    "detect_shocks",
    "emit_plot_data",
    "filter_aftershocks",
    "fit_gr",
    "generate",
    "identify_mainshock",
    "influence_window",
    "load_csv",
    "log_returns",
    "optimal_partition",
    "sample_gr_magnitudes",
    "save_csv",
    "segment_ssr_table",
    "slice_series",
    "temporal_rate",
]
