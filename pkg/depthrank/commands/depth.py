"""
depth command: depth of every row of a query file against a reference file.
"""

import logging

import click

from depthrank.commands.common import build_depth_spec, depth_options, guarded, seed_option, threads_option
from depthrank.services.datasets import check_same_dim, depth_csv, read_dataset
from depthrank.services.depth import depth_values
from depthrank.services.model import RngStream

logger = logging.getLogger(__name__)


@click.command("depth")
@click.argument("x_file", type=click.Path(dir_okay=False))
@click.argument("ref_file", type=click.Path(dir_okay=False))
@depth_options
@seed_option
@threads_option
@guarded
def cmd_depth(x_file, ref_file, method, mode, directions, location_scale, mad_constant, seed, threads):
    """Write (row_index, depth) for each row of X_FILE relative to REF_FILE."""
    queries = read_dataset(x_file)
    ref = read_dataset(ref_file)
    check_same_dim(queries, ref)
    spec = build_depth_spec(method, mode, directions, location_scale, mad_constant)
    logger.info(f"Computing {spec.label()} depth of {queries.size} points against {ref.size}")
    values = depth_values(queries.data, ref.data, spec, rng=RngStream(seed, 0), n_jobs=threads)
    click.echo(depth_csv(values), nl=False)
