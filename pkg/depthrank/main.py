"""
depthrank - command-line entry point

Depth-based multivariate rank-sum tests, their competitors and the power
studies around them. Logging goes to standard error so standard output
stays machine-readable.
"""

import logging
import sys

import click

from depthrank import __version__
from depthrank.commands.router import register
from depthrank.core.config import settings

logger = logging.getLogger(__name__)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


@click.group()
@click.version_option(__version__, prog_name="depthrank")
@click.option("--log-level", default=None, help="Overrides DEPTHRANK_LOG_LEVEL.")
def cli(log_level):
    """Depth-based rank-sum tests and power studies."""
    configure_logging(log_level or ("DEBUG" if settings.DEBUG else settings.LOG_LEVEL))


register(cli)


if __name__ == "__main__":
    cli()
