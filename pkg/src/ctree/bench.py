"""CLI for the evaluation harness: replay scripted workloads and compare
linear versus tree structuring."""

from __future__ import annotations

import json
import sys

import click

from ctree.analysis import compare, load_workload, render_comparison, replay_workload
from ctree.errors import CtreeError


@click.group()
def main():
    """Deterministic workload replay and efficiency reporting."""


@main.command()
@click.argument("workload", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def run(workload, as_json):
    """Replay one workload and report tokens + contamination."""
    try:
        report = replay_workload(load_workload(workload))
    except CtreeError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        click.echo(f"total submitted tokens: {report.total_submitted_tokens}")
        click.echo(f"contamination fraction: {report.contamination_fraction:.4f}")


@main.command(name="compare")
@click.argument("linear", type=click.Path(exists=True))
@click.argument("tree", type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def compare_cmd(linear, tree, as_json):
    """Compare a linear workload against its tree-structured twin."""
    try:
        result = compare(load_workload(linear), load_workload(tree))
    except CtreeError as exc:
        click.echo(f"error [{exc.code}]: {exc.message}", err=True)
        sys.exit(1)
    click.echo(json.dumps(result, indent=2) if as_json else render_comparison(result))
