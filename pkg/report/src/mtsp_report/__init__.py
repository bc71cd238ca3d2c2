"""Offline analysis of minmax-mTSP benchmark CSVs."""

from .tables import (BenchRow, GroupStats, SchemaError, load_bench_csv,
                     published_results_path, summarize, to_markdown)
from .plots import gap_series, plot_gaps

__version__ = "0.1.0"
