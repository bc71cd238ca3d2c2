"""Command-line surface: solve, bench, validate, export-lp, gen."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import replace

import click

from .bks import BksRegistry
from .driver import SearchConfig, run_batch, run_search
from .exact import export_lp
from .instance import Metric, ParseError, generate_random, parse_tsplib, write_tsplib
from .single_tour import TourImprover
from .solution import Solution, format_solution, parse_solution, validate

BUDGET_HELP = "'paper' = (n/100)*4 minutes, 'ms:<x>' or 'iters:<x>'"


def _load_instance(path: str, metric: str | None):
    override = Metric(metric) if metric else None
    try:
        with open(path) as fh:
            return parse_tsplib(fh, metric_override=override,
                                name=os.path.splitext(os.path.basename(path))[0])
    except FileNotFoundError:
        raise click.exceptions.Exit(2)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        raise click.exceptions.Exit(2)


def _apply_budget(cfg: SearchConfig, budget: str, n: int) -> SearchConfig:
    if budget == "paper":
        return replace(cfg, budget_ms=(n / 100.0) * 4 * 60 * 1000.0)
    if budget.startswith("ms:"):
        return replace(cfg, budget_ms=float(budget[3:]))
    if budget.startswith("iters:"):
        return replace(cfg, budget_iterations=int(budget[6:]))
    raise click.BadParameter(f"unknown budget {budget!r}; expected {BUDGET_HELP}")


def _common_config(alpha, l, epsilon, reaction, invert_epsilon, first_improvement,
                   seed, tour_improver) -> SearchConfig:
    improver = TourImprover.builtin()
    if tour_improver and tour_improver != "builtin":
        improver = TourImprover.external(tour_improver)
    return SearchConfig(alpha=alpha, l=l, epsilon=epsilon, reaction=reaction,
                        invert_epsilon=invert_epsilon,
                        first_improvement=first_improvement,
                        seed=seed, tour_improver=improver)


@click.group()
def main():
    """Minmax multiple-TSP solver and benchmark harness."""


@main.command()
@click.argument("instance_path", type=str)
@click.option("--m", "m", type=int, required=True, help="number of tours")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget", default="iters:10000", show_default=True, help=BUDGET_HELP)
@click.option("--alpha", type=int, default=10, show_default=True)
@click.option("--l", "l", type=float, default=0.15, show_default=True)
@click.option("--epsilon", type=float, default=0.01, show_default=True)
@click.option("--lambda", "reaction", type=float, default=0.5, show_default=True)
@click.option("--invert-epsilon", is_flag=True, default=False)
@click.option("--first-improvement", is_flag=True, default=False)
@click.option("--metric", type=click.Choice([m.value for m in Metric]), default=None)
@click.option("--tour-improver", default="builtin",
              help="'builtin' or a command run as CMD <in.tsp> <out.tour>")
@click.option("--bks", "bks_path", type=str, default=None, help="BKS registry CSV")
@click.option("--trace", "trace_path", type=str, default=None, help="write trace CSV here")
@click.option("--out", "out_path", type=str, default=None, help="solution file path")
@click.option("--summary", "summary_path", type=str, default=None, help="JSON summary path")
def solve(instance_path, m, seed, budget, alpha, l, epsilon, reaction,
          invert_epsilon, first_improvement, metric, tour_improver,
          bks_path, trace_path, out_path, summary_path):
    """Solve one instance and write the solution, summary, and optional trace."""
    inst = _load_instance(instance_path, metric)
    cfg = _common_config(alpha, l, epsilon, reaction, invert_epsilon,
                         first_improvement, seed, tour_improver)
    cfg = _apply_budget(cfg, budget, inst.n)
    cfg = replace(cfg, trace=trace_path is not None)
    res = run_search(inst, m, cfg)

    out_path = out_path or f"{inst.name}-m{m}.sol"
    with open(out_path, "w") as fh:
        fh.write(format_solution(res.best, name=inst.name))
    if trace_path:
        res.trace.to_csv(trace_path)

    registry = BksRegistry.from_file(bks_path) if bks_path else BksRegistry.default()
    entry = registry.get(inst.name, m)
    summary = {
        "name": inst.name,
        "n": inst.n,
        "m": m,
        "best": res.best.makespan,
        "time_ms": res.time_ms,
        "iterations": res.iterations,
        "seed": seed,
        "bks": entry.value if entry else None,
        "gap_to_bks": registry.gap_pct(inst.name, m, res.best.makespan),
        "solution_file": out_path,
    }
    if trace_path:
        summary["trace_file"] = trace_path
    text = json.dumps(summary, indent=2)
    click.echo(text)
    if summary_path:
        with open(summary_path, "w") as fh:
            fh.write(text + "\n")


@main.command()
@click.argument("manifest_path", type=str)
@click.option("--runs", type=int, default=2, show_default=True)
@click.option("--budget", default="iters:10000", show_default=True, help=BUDGET_HELP)
@click.option("--seed", type=int, default=0, show_default=True, help="base seed")
@click.option("--bks", "bks_path", type=str, default=None)
@click.option("--out", "out_path", type=str, default=None, help="output CSV (default stdout)")
def bench(manifest_path, runs, budget, seed, bks_path, out_path):
    """Run a benchmark manifest (CSV with columns path,m) and emit a results CSV."""
    registry = BksRegistry.from_file(bks_path) if bks_path else BksRegistry.default()
    try:
        with open(manifest_path) as fh:
            jobs = [(row["path"], int(row["m"])) for row in csv.DictReader(fh)]
    except (OSError, KeyError, ValueError) as exc:
        click.echo(f"error: bad manifest: {exc}", err=True)
        raise click.exceptions.Exit(2)

    rows = []
    for path, m in jobs:
        try:
            inst = _load_instance(path, None)
            cfg = _apply_budget(SearchConfig(seed=seed, trace=False), budget, inst.n)
            summary = run_batch(inst, m, cfg, runs)
            bks_e = registry.get(inst.name, m)
            delta = registry.gap_pct(inst.name, m, summary.best)
            rows.append({
                "name": inst.name, "m": m,
                "bks": f"{bks_e.value!r}" if bks_e else "",
                "best": f"{summary.best!r}",
                "avg": f"{summary.average!r}",
                "delta_pct": f"{delta!r}" if delta is not None else "",
                "time_ms": f"{summary.wall_ms:.1f}",
            })
        except Exception as exc:  # one failed row must not sink the batch
            rows.append({"name": os.path.basename(path), "m": m, "bks": "",
                         "best": "FAILED", "avg": "FAILED", "delta_pct": "",
                         "time_ms": f"{exc}"})
    header = ["name", "m", "bks", "best", "avg", "delta_pct", "time_ms"]
    lines = [",".join(header)] + [",".join(str(r[h]) for h in header) for r in rows]
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@main.command(name="validate")
@click.argument("instance_path", type=str)
@click.option("--m", "m", type=int, required=True)
@click.argument("solution_path", type=str)
def validate_cmd(instance_path, m, solution_path):
    """Check a solution file against an instance; nonzero exit on violations."""
    inst = _load_instance(instance_path, None)
    try:
        with open(solution_path) as fh:
            _, file_m, _, tours = parse_solution(fh.read())
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        raise click.exceptions.Exit(2)
    sol = Solution(inst, tours)
    problems = validate(inst, m, sol)
    if file_m != m:
        problems.insert(0, f"solution file declares m={file_m}, expected {m}")
    if problems:
        for p in problems:
            click.echo(f"violation: {p}")
        raise click.exceptions.Exit(1)
    click.echo(f"ok: makespan {sol.makespan!r}")


@main.command(name="export-lp")
@click.argument("instance_path", type=str)
@click.option("--m", "m", type=int, required=True)
@click.option("--out", "out_path", type=str, required=True)
def export_lp_cmd(instance_path, m, out_path):
    """Write the flow-based MILP in CPLEX-LP format."""
    inst = _load_instance(instance_path, None)
    with open(out_path, "w") as fh:
        fh.write(export_lp(inst, m))
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--n", type=int, required=True, help="number of cities (excl. depot)")
@click.option("--width", type=float, default=1000.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=str, required=True)
def gen(n, width, seed, out_path):
    """Generate a uniform random instance in TSPLIB format."""
    try:
        inst = generate_random(n, width, seed)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        raise click.exceptions.Exit(2)
    with open(out_path, "w") as fh:
        fh.write(write_tsplib(inst))
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
