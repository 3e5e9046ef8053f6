"""
qtest command: the depth-based rank-sum test of F = G, or of Q(F, G) = q0.
"""

import logging

import click

from depthrank.commands.common import (
    alpha_option,
    build_depth_spec,
    depth_options,
    guarded,
    seed_option,
    threads_option,
)
from depthrank.schemas.reports import qtest_response
from depthrank.services.datasets import check_same_dim, read_dataset
from depthrank.services.model import RngStream
from depthrank.services.ranksum import general_test, null_test

logger = logging.getLogger(__name__)


@click.command("qtest")
@click.argument("x_file", type=click.Path(dir_okay=False))
@click.argument("y_file", type=click.Path(dir_okay=False))
@depth_options
@alpha_option
@click.option("--q0", type=click.FloatRange(0.0, 1.0), default=None, help="Test Q(F, G) = q0 instead of F = G.")
@seed_option
@threads_option
@guarded
def cmd_qtest(x_file, y_file, method, mode, directions, location_scale, mad_constant, alpha, q0, seed, threads):
    """Compare the sample in Y_FILE against the reference sample in X_FILE."""
    X = read_dataset(x_file)
    Y = read_dataset(y_file)
    check_same_dim(X, Y)
    spec = build_depth_spec(method, mode, directions, location_scale, mad_constant)
    rng = RngStream(seed, 0)
    if q0 is None:
        report = null_test(X.data, Y.data, spec, alpha, rng=rng, n_jobs=threads)
    else:
        report = general_test(X.data, Y.data, spec, q0, alpha, rng=rng, n_jobs=threads)
    logger.info(f"Q = {report.statistic:.6f}, p = {report.p_value:.4g}")
    click.echo(qtest_response(report).model_dump_json(indent=2, exclude_none=True))
