"""
FermiBalance – Command-line interface
======================================
``demo <name>``, ``check <config.json>`` and ``dual <config.json> --map <spec>``.

The JSON report goes to standard output and a short summary to standard
error. Exit status: 0 when every verdict matches, 1 when a verdict fails,
2 when the scenario cannot be loaded or validated.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from typing import Callable, NoReturn, Optional

import click

from cli.checks import MAP_SPECS, run_check, run_dual
from cli.demos import DEMOS
from cli.report import RunReport
from cli.scenario import Scenario, build_scenario, load_scenario
from core.settings import DEFAULT_TOLERANCE

log = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_INVALID = 2


@dataclass(frozen=True)
class Options:
    tolerance: Optional[float]
    json_only: bool
    timings: bool

    def verdict_tolerance(self, scenario_tolerance: Optional[float] = None) -> float:
        """``--tolerance`` wins over the scenario value, which wins over the default."""
        if self.tolerance is not None:
            return self.tolerance
        if scenario_tolerance is not None:
            return scenario_tolerance
        return DEFAULT_TOLERANCE


def _emit(ctx: click.Context, report: RunReport) -> None:
    options: Options = ctx.obj
    click.echo(report.to_json(include_timings=options.timings))
    if not options.json_only:
        click.echo(report.summary(), err=True)
    ctx.exit(0 if report.passed else EXIT_FAILED)


def _invalid(ctx: click.Context, exc: Exception) -> NoReturn:
    click.echo(f"error: {exc}", err=True)
    ctx.exit(EXIT_INVALID)


def _run_scenario(ctx: click.Context, config_path: str, run: Callable[[Scenario, float], RunReport]) -> None:
    try:
        config = load_scenario(config_path)
        scenario = build_scenario(config)
        report = run(scenario, ctx.obj.verdict_tolerance(config.tolerance))
    except (ValueError, FileNotFoundError, KeyError, TypeError) as exc:
        log.debug("Scenario %s rejected", config_path, exc_info=True)
        _invalid(ctx, exc)
    _emit(ctx, report)


@click.group()
@click.option("--tolerance", type=float, default=None,
              help=f"Verdict tolerance (default: scenario value, else {DEFAULT_TOLERANCE:g}).")
@click.option("--json-only", is_flag=True, help="Suppress the summary on standard error.")
@click.option("--verbose", is_flag=True, help="Log DEBUG messages to standard error.")
@click.option("--timings", is_flag=True, help="Include wall-clock timings in the JSON report.")
@click.pass_context
def cli(ctx: click.Context, tolerance: Optional[float], json_only: bool, verbose: bool, timings: bool) -> None:
    """Detailed balance and duality checks for finite fermion lattices."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    if tolerance is not None and tolerance <= 0:
        raise click.BadParameter("must be positive", param_hint="--tolerance")
    ctx.obj = Options(tolerance=tolerance, json_only=json_only, timings=timings)


@cli.command()
@click.argument("name", type=click.Choice(sorted(DEMOS)))
@click.pass_context
def demo(ctx: click.Context, name: str) -> None:
    """Reproduce one of the worked examples."""
    _emit(ctx, DEMOS[name](ctx.obj.verdict_tolerance()))


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.pass_context
def check(ctx: click.Context, config_path: str) -> None:
    """Run reduction, balance and (optionally) duality checks on a scenario."""
    _run_scenario(ctx, config_path, run_check)


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--map", "map_spec", default="dynamics", show_default=True, help=f"One of {MAP_SPECS}.")
@click.pass_context
def dual(ctx: click.Context, config_path: str, map_spec: str) -> None:
    """Print the fermionic dual of a map on A(I)."""
    _run_scenario(ctx, config_path, lambda scenario, _tolerance: run_dual(scenario, map_spec))


if __name__ == "__main__":
    cli()
