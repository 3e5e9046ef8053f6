"""
power and reproduce commands: Monte Carlo power grids and the published
tables and figures, written as CSV plus a run manifest.
"""

import logging
from typing import List

import click

from depthrank.commands.common import (
    alpha_option,
    build_depth_spec,
    depth_options,
    format_table,
    guarded,
    seed_option,
    threads_option,
)
from depthrank.commands.render import render_grid
from depthrank.core.config import settings
from depthrank.core.errors import DomainError
from depthrank.services.competitors import OJA_MODES, OjaConfig
from depthrank.services.model import FAMILIES
from depthrank.services.powerlab import (
    BUDGETS,
    TARGETS,
    TESTS,
    Stopwatch,
    power_grid,
    reproduce,
    run_manifest,
    save_grid,
)

logger = logging.getLogger(__name__)


def parse_grid(text: str) -> List[float]:
    """'0,0.1,0.2' or 'start:stop:step' (stop inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise DomainError("grid step must be positive", grid=text)
            count = int(round((stop - start) / step)) + 1
            return [round(start + k * step, 12) for k in range(max(count, 0))]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise DomainError(f"cannot parse parameter grid '{text}'", grid=text) from exc


@click.command("power")
@click.option("--family", type=click.Choice(FAMILIES), required=True)
@click.option("--param-grid", required=True, help="Comma list or start:stop:step.")
@click.option("--m", "m", type=click.IntRange(min=1), default=25, show_default=True)
@click.option("--n", "n", type=click.IntRange(min=1), default=25, show_default=True)
@alpha_option
@click.option("--test", "test_name", type=click.Choice(TESTS), default="q", show_default=True)
@click.option("--reps", type=click.IntRange(min=1), default=1000, show_default=True)
@depth_options
@click.option("--oja-mode", type=click.Choice(OJA_MODES), default="exact", show_default=True)
@click.option("--subsets", type=click.IntRange(min=1), default=None)
@seed_option
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory (default OUTPUT_DIR).")
@threads_option
@guarded
def cmd_power(
    family, param_grid, m, n, alpha, test_name, reps, method, mode, directions,
    location_scale, mad_constant, oja_mode, subsets, seed, out_dir, threads,
):
    """Monte Carlo power of one test along a family's parameter grid."""
    params = parse_grid(param_grid)
    if not params:
        raise DomainError("parameter grid is empty", grid=param_grid)
    spec = build_depth_spec(method, mode, directions, location_scale, mad_constant)
    oja = OjaConfig(mode=oja_mode, n_subsets=subsets or settings.OJA_DEFAULT_SUBSETS)

    with Stopwatch() as watch:
        grid = power_grid(
            family, params, m, n, test=test_name, alpha=alpha, replications=reps,
            seed=seed, depth=spec, oja=oja, n_jobs=threads,
        )
    plan = {
        "family": family,
        "params": params,
        "m": m,
        "n": n,
        "alpha": alpha,
        "test": test_name,
        "depth": spec.label() if test_name == "q" else None,
        "n_directions": spec.n_directions if test_name == "q" else None,
        "oja_mode": oja.mode if test_name == "oja" else None,
    }
    manifest = run_manifest(
        grid.target, plan, watch.elapsed, seed=seed, replications=reps,
        threads=settings.resolved_threads(threads),
    )
    save_grid(grid, manifest, out_dir or settings.OUTPUT_DIR, stem=f"power-{family}-{test_name}")
    click.echo(format_table(grid))


@click.command("reproduce")
@click.option("--target", type=click.Choice(TARGETS), required=True)
@click.option("--budget", type=click.Choice(sorted(BUDGETS)), default="paper", show_default=True)
@alpha_option
@seed_option
@click.option("--analytic-only", is_flag=True, help="Skip Monte Carlo cells.")
@click.option("--svg", is_flag=True, help="Also render the grid as SVG.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Output directory (default OUTPUT_DIR).")
@threads_option
@guarded
def cmd_reproduce(target, budget, alpha, seed, analytic_only, svg, out_dir, threads):
    """Rebuild a published table or figure."""
    with Stopwatch() as watch:
        grid = reproduce(target, budget=budget, seed=seed, alpha=alpha, monte_carlo=not analytic_only, n_jobs=threads)
    plan = {"target": target, "alpha": alpha, "monte_carlo": not analytic_only}
    manifest = run_manifest(
        target, plan, watch.elapsed, seed=seed, budget=budget,
        threads=settings.resolved_threads(threads),
    )
    out = out_dir or settings.OUTPUT_DIR
    paths = save_grid(grid, manifest, out)
    if svg:
        render_grid(grid, paths[0].with_suffix(".svg"))
    click.echo(format_table(grid))
