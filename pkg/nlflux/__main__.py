"""
CLI entry point for the nlflux tool.

This allows running: python -m nlflux <command>
Or after installation: nlflux <command>

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import click

from .cli.compare import compare
from .cli.decay import decay
from .cli.exact import exact
from .cli.mild import mild
from .cli.particles import particles
from .cli.simulate import simulate


@click.group()
@click.version_option(version='1.0.0')
def cli():
    """
    Nonlocal flux toolkit

    Configuration-driven solvers and checks for the one-dimensional
    nonlocal flux equation with fractional diffusion: time stepping,
    exact solutions by characteristics, mild solutions, decay fits and
    the interacting particle system.
    """
    pass


# Register all commands
cli.add_command(simulate)
cli.add_command(exact)
cli.add_command(decay)
cli.add_command(mild)
cli.add_command(particles)
cli.add_command(compare)


if __name__ == '__main__':
    cli()
