"""Command-line front end for the bench-CSV analysis."""
from __future__ import annotations

import click

from .plots import plot_gaps
from .tables import published_results_path, summarize, to_markdown


@click.group()
def main():
    """Summaries and plots for solver bench CSVs."""


@main.command(name="summarize")
@click.argument("csv_paths", nargs=-1, required=False)
@click.option("--out", "out_path", default=None, help="write Markdown here instead of stdout")
@click.option("--published", is_flag=True, default=False,
              help="use the shipped appendix-results fixture")
def summarize_cmd(csv_paths, out_path, published):
    """Win/tie/loss table per tour-count group across one or more CSVs."""
    paths = list(csv_paths)
    if published:
        paths.append(published_results_path())
    if not paths:
        raise click.UsageError("give at least one CSV or --published")
    text = to_markdown(*paths)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


@main.command(name="plot")
@click.argument("csv_path")
@click.argument("out_path")
def plot_cmd(csv_path, out_path):
    """Gap-per-instance plot (PNG/SVG by extension)."""
    labels, _ = plot_gaps(csv_path, out_path)
    click.echo(f"wrote {out_path} ({len(labels)} instances)")


if __name__ == "__main__":
    main()
