"""
render command: SVG line plots of a power grid (fig1 and fig2 in particular).
"""

import logging
from pathlib import Path

import click
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from depthrank.commands.common import guarded  # noqa: E402
from depthrank.core.errors import DataFileError  # noqa: E402
from depthrank.schemas.power import PowerGrid  # noqa: E402

logger = logging.getLogger(__name__)


def render_grid(grid: PowerGrid, path) -> Path:
    """One line per (method, group); empty cells are skipped."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 5))
    try:
        for group in grid.groups():
            for method in grid.methods():
                points = [
                    (c.param, c.power)
                    for c in grid.cells
                    if c.group == group and c.method == method and c.power is not None
                ]
                if not points:
                    continue
                xs, ys = zip(*points)
                label = f"{method} {group}".strip()
                ax.plot(xs, ys, marker="o", markersize=3, linewidth=1, label=label)
        ax.set_xlabel(grid.param_name)
        ax.set_ylabel("Q" if grid.target == "fig1" else "power")
        ax.set_title(grid.description or grid.target)
        ax.grid(True, alpha=0.3)
        if ax.lines:
            ax.legend(fontsize=7, ncol=2)
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    logger.info(f"Rendered {grid.target} to {path}")
    return path


@click.command("render")
@click.argument("grid_csv", type=click.Path(dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="SVG path (default: next to the CSV).")
@guarded
def cmd_render(grid_csv, out_path):
    """Render a power grid CSV written by power or reproduce as SVG."""
    source = Path(grid_csv)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFileError(f"{source}: cannot read file: {exc.strerror}", file=str(source)) from exc
    try:
        grid = PowerGrid.from_csv(text, target=source.stem)
    except (KeyError, ValueError) as exc:
        raise DataFileError(f"{source}: not a power grid CSV: {exc}", file=str(source)) from exc
    target = render_grid(grid, out_path or source.with_suffix(".svg"))
    click.echo(str(target))
