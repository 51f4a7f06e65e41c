"""
nlflux mild command - Picard iteration of the Duhamel map.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import logging
from pathlib import Path

import click

from ..core.config import RunConfig
from ..core.mild import picard_solve, x_t_norm
from ..core.report import write_rows_csv, write_trajectory_csv
from .common import CommandResult, execute, run_options, summary_table

logger = logging.getLogger(__name__)


def picard_options(section: dict) -> dict:
    return {
        'm': int(section.get('m', 64)),
        'max_iter': int(section.get('max_iter', 50)),
        'tol': float(section.get('tol', 1e-8)),
        'rule': section.get('rule', 'trapezoid'),
        'enforce_smallness': bool(section.get('enforce_smallness', False)),
    }


@click.command()
@run_options
def mild(config_path: str, out: str, seed: int, quiet: bool, verbose: bool):
    """
    Build the mild solution on [0, mild.T] by Picard iteration.

    Needs 1 < physics.alpha <= 2.  Writes trajectory.csv on the graded time
    mesh, picard.csv with the X_T gap of every iterate, and meta.yaml with
    the measured smallness and empirical contraction constant.

    Exit codes:
    - 0: Success (also when max_iter is reached; see the converged flag)
    - 2: Configuration error
    - 5: Divergence or violated smallness with enforce_smallness

    Examples:

        nlflux mild --config configs/mild_small_data.yaml
    """
    execute('mild', _mild, config_path, out, seed, quiet, verbose)


def _mild(cfg: RunConfig, out_dir: Path) -> CommandResult:
    params = cfg.require_physics()
    section = cfg.section('mild')
    T = float(section['T'])
    traj, report = picard_solve(cfg.initial_profile(), params, T, **picard_options(section))
    if not report.converged:
        logger.warning("Picard iteration stopped after %d iterations without converging",
                       report.iterations)
    write_trajectory_csv(out_dir / 'trajectory.csv', traj)
    write_rows_csv(out_dir / 'picard.csv', ['iteration', 'gap'],
                   ({'iteration': k + 1, 'gap': g} for k, g in enumerate(report.iterate_gaps)))
    norm = x_t_norm(traj, params.alpha)
    stats = {
        'iterations': report.iterations,
        'converged': report.converged,
        'final_gap': report.iterate_gaps[-1],
        'smallness': report.a_measured,
        'contraction_constant': report.c_empirical,
        'smallness_ok': report.smallness_ok,
        'x_t_norm': norm.value,
    }
    table = summary_table(f"mild (alpha={params.alpha:g}, T={T:g})", stats)
    return CommandResult(['trajectory.csv', 'picard.csv'], stats, table)
