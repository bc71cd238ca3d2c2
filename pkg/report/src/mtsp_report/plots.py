"""Gap-to-best-known plots from bench CSVs."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .tables import load_bench_csv  # noqa: E402


def gap_series(csv_path: str) -> tuple[list[str], list[float]]:
    """(instance labels, gap percentages) in file order."""
    rows = load_bench_csv(csv_path)
    if not rows:
        raise ValueError(f"{csv_path}: no usable rows to plot")
    labels = [f"{r.name}-{r.m}" for r in rows]
    values = [r.delta_pct for r in rows]
    return labels, values


def plot_gaps(csv_path: str, out_path: str) -> tuple[list[str], list[float]]:
    """Write a gap-per-instance plot; returns the plotted series."""
    labels, values = gap_series(csv_path)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.22 * len(labels)), 4.0))
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.plot(range(len(values)), values, marker="o", ms=3, lw=0.8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("gap to best known (%)")
    ax.set_xlabel("instance")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return labels, values
