"""
Command registry for depthrank.

This module combines all command modules into the root command group.
"""

import click

from depthrank.commands import competitor, depth, power, qtest, render, schema


def register(group: click.Group) -> click.Group:
    """Attach every command to the root group."""
    group.add_command(depth.cmd_depth)
    group.add_command(qtest.cmd_qtest)
    group.add_command(competitor.cmd_competitor)
    group.add_command(power.cmd_power)
    group.add_command(power.cmd_reproduce)
    group.add_command(schema.cmd_schema)
    group.add_command(render.cmd_render)
    return group
