"""
competitor command: Hotelling's T² or the Oja rank test on two files.
"""

import logging

import click

from depthrank.commands.common import alpha_option, guarded, seed_option, threads_option
from depthrank.core.config import settings
from depthrank.schemas.reports import competitor_response
from depthrank.services.competitors import OJA_MODES, OjaConfig, hotelling_t2_test, oja_test
from depthrank.services.datasets import check_same_dim, read_dataset
from depthrank.services.model import RngStream

logger = logging.getLogger(__name__)


@click.command("competitor")
@click.argument("x_file", type=click.Path(dir_okay=False))
@click.argument("y_file", type=click.Path(dir_okay=False))
@click.option("--test", "test_name", type=click.Choice(["t2", "oja"]), default="t2", show_default=True)
@alpha_option
@click.option("--oja-mode", type=click.Choice(OJA_MODES), default="exact", show_default=True)
@click.option("--subsets", type=click.IntRange(min=1), default=None, help="Subsets drawn in subset-sampled mode.")
@seed_option
@threads_option
@guarded
def cmd_competitor(x_file, y_file, test_name, alpha, oja_mode, subsets, seed, threads):
    """Run a competitor two-sample test on X_FILE and Y_FILE."""
    X = read_dataset(x_file)
    Y = read_dataset(y_file)
    check_same_dim(X, Y)
    if test_name == "t2":
        report = hotelling_t2_test(X.data, Y.data, alpha)
    else:
        cfg = OjaConfig(mode=oja_mode, n_subsets=subsets or settings.OJA_DEFAULT_SUBSETS)
        report = oja_test(X.data, Y.data, cfg, alpha, rng=RngStream(seed, 0), n_jobs=threads)
    logger.info(f"{test_name}: statistic {report.statistic:.6f}, p = {report.p_value:.4g}")
    click.echo(competitor_response(report).model_dump_json(indent=2, exclude_none=True))
