"""Benchmark-CSV loading and win/tie/loss summaries.

Consumes the solver's bench CSV format (columns name, m, bks, best, avg,
delta_pct, time_ms). A win is a gap below -1e-6 percent, a tie within 1e-6,
anything else a loss; gaps are 100 * (best - bks) / bks.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources

TIE_EPS = 1e-6
REQUIRED_COLUMNS = ("name", "m", "bks", "best", "avg")
GROUPS = (3, 5, 10, 20, 30)


class SchemaError(ValueError):
    """The CSV is missing a required column (named in the message)."""


@dataclass(frozen=True)
class BenchRow:
    name: str
    m: int
    bks: float
    best: float
    avg: float
    delta_pct: float


@dataclass
class GroupStats:
    wins: int = 0
    ties: int = 0
    losses: int = 0
    total_delta: float = 0.0
    count: int = 0

    @property
    def mean_delta(self) -> float:
        return self.total_delta / self.count if self.count else 0.0


def load_bench_csv(path: str) -> list[BenchRow]:
    """Parse one bench CSV. Rows marked FAILED or lacking a BKS value are
    dropped (they carry no comparable result). A stored delta_pct must agree
    with the recomputed gap to 1e-6."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for col in REQUIRED_COLUMNS:
            if col not in fields:
                raise SchemaError(f"{path}: missing required column {col!r}")
        rows = []
        for rec in reader:
            if rec["best"] in ("", "FAILED") or rec["bks"] in ("", None):
                continue
            bks = float(rec["bks"])
            best = float(rec["best"])
            avg = float(rec["avg"])
            delta = 100.0 * (best - bks) / bks
            stored = rec.get("delta_pct")
            if stored not in (None, ""):
                if abs(float(stored) - delta) > 1e-6:
                    raise SchemaError(
                        f"{path}: stored delta_pct {stored} differs from "
                        f"recomputed {delta!r} for {rec['name']}-{rec['m']}")
            rows.append(BenchRow(name=rec["name"], m=int(rec["m"]), bks=bks,
                                 best=best, avg=avg, delta_pct=delta))
    return rows


def published_results_path() -> str:
    """The shipped appendix-results fixture (all 77 instances)."""
    return str(resources.files("mtsp_report").joinpath("data/published_results.csv"))


def summarize(*paths: str) -> dict[int, GroupStats]:
    """Win/tie/loss counts and mean gap per tour-count group across CSVs."""
    out: dict[int, GroupStats] = {}
    for path in paths:
        for row in load_bench_csv(path):
            g = out.setdefault(row.m, GroupStats())
            if row.delta_pct < -TIE_EPS:
                g.wins += 1
            elif abs(row.delta_pct) <= TIE_EPS:
                g.ties += 1
            else:
                g.losses += 1
            g.total_delta += row.delta_pct
            g.count += 1
    return out


def _wilcoxon_p(rows: list[BenchRow]) -> float | None:
    """Signed-rank p-value of best vs BKS, or None when scipy is unavailable
    or the test is undefined (all differences zero)."""
    try:
        from scipy.stats import wilcoxon
    except ImportError:
        return None
    diffs = [r.best - r.bks for r in rows if abs(r.best - r.bks) > 0]
    if not diffs:
        return None
    try:
        return float(wilcoxon(diffs).pvalue)
    except ValueError:
        return None


def to_markdown(*paths: str) -> str:
    """Render the summary as a Markdown table (wins/ties/losses/mean gap per
    group, plus a Wilcoxon column when scipy is installed)."""
    rows_by_m: dict[int, list[BenchRow]] = {}
    for path in paths:
        for row in load_bench_csv(path):
            rows_by_m.setdefault(row.m, []).append(row)
    summary = summarize(*paths)
    have_scipy = _scipy_available()
    header = "| m | wins | ties | losses | mean gap (%) |"
    sep = "|---|---|---|---|---|"
    if have_scipy:
        header += " Wilcoxon p |"
        sep += "---|"
    lines = [header, sep]
    for m in sorted(summary):
        g = summary[m]
        line = f"| {m} | {g.wins} | {g.ties} | {g.losses} | {g.mean_delta:+.2f} |"
        if have_scipy:
            p = _wilcoxon_p(rows_by_m[m])
            line += f" {p:.2e} |" if p is not None else " - |"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _scipy_available() -> bool:
    try:
        import scipy  # noqa: F401
        return True
    except ImportError:
        return False
