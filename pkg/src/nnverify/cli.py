"""Command line interface: `nnverify verify` and `nnverify bench`."""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import bench as bench_mod
from .io import ParseError, dumps, load_network, load_problem
from .oracle import OracleBudgetError, oracle_verify
from .solvers import SOLVERS

EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, EXIT_PARSE = 0, 1, 2, 3


def _parse_value(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _parse_params(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise click.BadParameter(f"expected k=v, got {item!r}", param_hint="--param")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


@click.group()
def cli():
    """Verify input-output properties of small ReLU networks."""


def main(argv=None):
    """Console entry point; usage errors exit 1 so that 2 always means a violated property."""
    try:
        cli.main(args=argv, prog_name="nnverify", standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_USAGE)


@cli.command()
@click.option("--network", "network_path", type=click.Path(dir_okay=False), default=None, help="Network text file.")
@click.option("--problem", "problem_path", type=click.Path(dir_okay=False), required=True, help="Problem JSON file.")
@click.option("--solver", type=click.Choice(sorted(SOLVERS)), default=None)
@click.option("--param", "params", multiple=True, help="Solver parameter as k=v; repeatable.")
@click.option("--oracle", is_flag=True, help="Also run the exhaustive oracle.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="json")
@click.option("--seed", type=int, default=0, help="Seed for any randomized step.")
@click.option("--timeout", type=float, default=None, help="Cooperative time limit in seconds.")
def verify(network_path, problem_path, solver, params, oracle, fmt, seed, timeout):
    """Run one solver on one problem."""
    np.random.seed(seed)
    try:
        net = load_network(network_path) if network_path else None
        pf = load_problem(problem_path, network=net)
    except ParseError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(EXIT_PARSE)
    except OSError as e:
        click.echo(f"cannot read input: {e}", err=True)
        sys.exit(EXIT_PARSE)
    name = solver or pf.solver
    if name is None:
        raise click.UsageError("no solver given on the command line or in the problem file")
    if name not in SOLVERS:
        raise click.UsageError(f"unknown solver {name!r}")
    merged = {**pf.params, **_parse_params(params)}
    try:
        res, dt = bench_mod.run_solver(name, pf.problem, merged, timeout)
    except (TypeError, ValueError) as e:
        raise click.UsageError(str(e)) from None
    oracle_status = None
    if oracle:
        try:
            oracle_status = oracle_verify(pf.problem).status.value
        except OracleBudgetError as e:
            click.echo(f"oracle skipped: {e}", err=True)
    rec = bench_mod.RunRecord(name, res.status.value, res.payload(), round(dt, 6), oracle_status)
    if fmt == "json":
        click.echo(dumps(rec.to_dict()), nl=False)
    else:
        click.echo(f"solver   {rec.solver}\nstatus   {rec.status}\ntime_s   {rec.time_s:.4f}")
        for k, v in rec.payload.items():
            click.echo(f"{k:<8} {json.dumps(v)}")
        if oracle_status is not None:
            click.echo(f"oracle   {oracle_status}\nagree    {rec.agree}")
    sys.exit(EXIT_VIOLATED if res.status.value == "violated" else EXIT_OK)


@cli.command()
@click.option("--group", type=click.IntRange(1, 6), required=True)
@click.option("--count", type=click.IntRange(1), default=10)
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="json")
@click.option("--timings/--no-timings", default=False, help="Include wall times (makes output run-dependent).")
@click.option("--timeout", type=float, default=None)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write the report here instead of stdout.")
def bench(group, count, seed, fmt, timings, timeout, output):
    """Run a solver group on seeded random instances against the oracle."""
    report = bench_mod.run_group(group, count, seed, timings=timings, timeout=timeout)
    text = dumps(report) if fmt == "json" else bench_mod.format_table(report) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
