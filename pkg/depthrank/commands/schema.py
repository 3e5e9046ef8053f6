"""
schema command: JSON Schema documents for every JSON output.
"""

import json
import logging
from pathlib import Path

import click

from depthrank.commands.common import guarded
from depthrank.schemas.mixture import MixtureDocument
from depthrank.schemas.power import RunManifest
from depthrank.schemas.reports import CompetitorResponse, ErrorResponse, QTestResponse

logger = logging.getLogger(__name__)

SCHEMAS = {
    "qtest": QTestResponse,
    "competitor": CompetitorResponse,
    "error": ErrorResponse,
    "manifest": RunManifest,
    "mixture": MixtureDocument,
}


@click.command("schema")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None, help="Directory for <name>.schema.json files.")
@click.option("--name", type=click.Choice(sorted(SCHEMAS)), default=None, help="Print one schema to stdout.")
@guarded
def cmd_schema(out_dir, name):
    """Print or write the JSON Schemas of the command outputs."""
    if name is not None:
        click.echo(json.dumps(SCHEMAS[name].model_json_schema(), indent=2))
        return
    if out_dir is None:
        click.echo(json.dumps({k: m.model_json_schema() for k, m in SCHEMAS.items()}, indent=2))
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for key, model in SCHEMAS.items():
        path = out / f"{key}.schema.json"
        path.write_text(json.dumps(model.model_json_schema(), indent=2), encoding="utf-8")
        click.echo(str(path))
