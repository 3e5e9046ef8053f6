"""
Helpers shared by the command modules: error conversion, shared options
and the aligned text table printed next to every power grid.
"""

import functools
import logging
from typing import Callable

import click

from depthrank.core.config import settings
from depthrank.core.errors import DepthRankError
from depthrank.schemas.power import PowerGrid
from depthrank.schemas.reports import ErrorResponse
from depthrank.services.depth import LOCATION_SCALES, METHODS, MODES, DepthSpec

logger = logging.getLogger(__name__)


def guarded(func: Callable) -> Callable:
    """Turn a DepthRankError into error JSON on stdout and its exit status."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DepthRankError as exc:
            logger.error(f"{type(exc).__name__}: {exc.message}")
            click.echo(ErrorResponse(**exc.to_dict()).model_dump_json(indent=2, exclude_none=True))
            click.get_current_context().exit(exc.exit_code)

    return wrapper


def threads_option(func: Callable) -> Callable:
    return click.option(
        "--threads",
        type=int,
        default=None,
        help="Worker count (default DEPTHRANK_THREADS, 0 = all cores). Never changes results.",
    )(func)


def seed_option(func: Callable) -> Callable:
    return click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=0, show_default=True)(func)


def alpha_option(func: Callable) -> Callable:
    return click.option("--alpha", type=click.FloatRange(0.0, 1.0, min_open=True, max_open=True), default=0.05, show_default=True)(func)


def depth_options(func: Callable) -> Callable:
    """--method, --mode, --directions, --location-scale, --mad-constant."""
    options = [
        click.option("--method", type=click.Choice(METHODS), default="halfspace", show_default=True),
        click.option("--mode", type=click.Choice(MODES), default="exact", show_default=True),
        click.option("--directions", type=click.IntRange(min=1), default=None, help="Random directions in approximate mode."),
        click.option("--location-scale", type=click.Choice(LOCATION_SCALES), default="median-mad", show_default=True),
        click.option("--mad-constant", type=float, default=1.0, show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def format_table(grid: PowerGrid) -> str:
    """One block per group: a param column and one column per method."""
    methods = grid.methods()
    lines = [f"{grid.target}: {grid.description}".rstrip(": ")]
    for group in grid.groups():
        if group:
            lines.append("")
            lines.append(f"[{group}]")
        header = [grid.param_name] + methods
        lines.append("  ".join(f"{h:>10}" for h in header))
        for param in grid.params(group):
            values = []
            for method in methods:
                try:
                    cell = grid.cell(method, param, group)
                except KeyError:
                    values.append("")
                    continue
                values.append("" if cell.power is None else f"{cell.power:.3f}")
            lines.append("  ".join(f"{v:>10}" for v in [f"{param:g}"] + values))
    return "\n".join(lines)


def build_depth_spec(method: str, mode: str, directions, location_scale: str, mad_constant: float) -> DepthSpec:
    return DepthSpec(
        method=method,
        mode=mode,
        n_directions=directions or settings.DEFAULT_DIRECTIONS,
        location_scale=location_scale,
        mad_constant=mad_constant,
    )
