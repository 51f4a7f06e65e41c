"""
nlflux decay command - Fit late-time decay rates of norms and derivatives.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import math
from pathlib import Path
from typing import List, Tuple, Union

import click

from ..core.config import RunConfig
from ..core.diagnostics import build_report
from ..core.evolve import run
from ..core.report import write_report_csv, write_rows_csv
from .common import CommandResult, execute, run_options, summary_table

DECAY_COLUMNS = ['q', 'theta', 'slope', 'predicted', 'deviation']


def predicted_slope(alpha: float, q: float, theta: int) -> float:
    """-theta/alpha - 1 + (1 + 1/q)/alpha."""
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    return -theta / alpha - 1.0 + (1.0 + inv_q) / alpha


def _exponents(cfg: RunConfig) -> List[Tuple[float, int]]:
    listed = cfg.raw.get('decay', {}).get('exponents', [{'q': 'inf', 'theta': 0}])
    pairs = []
    for item in listed:
        q: Union[str, float] = item['q']
        pairs.append((math.inf if q == 'inf' else float(q), int(item['theta'])))
    return pairs


@click.command()
@run_options
def decay(config_path: str, out: str, seed: int, quiet: bool, verbose: bool):
    """
    Evolve a configuration and fit log-log slopes of ||d_x^theta rho(t)||_q.

    The (q, theta) pairs come from decay.exponents (default q=inf, theta=0)
    and are fitted over decay.window (default: the last decade of the run).
    Writes decay.csv with fitted and predicted slopes, report.csv and
    meta.yaml.

    Exit codes:
    - 0: Success
    - 2: Configuration error
    - 3: Blow-up
    - 5: Numerical failure (e.g. too few samples in the fit window)

    Examples:

        nlflux decay --config configs/alpha2_semicircle.yaml
    """
    execute('decay', _decay, config_path, out, seed, quiet, verbose)


def _decay(cfg: RunConfig, out_dir: Path) -> CommandResult:
    params = cfg.require_physics()
    solver = cfg.require_solver()
    pairs = _exponents(cfg)
    window = cfg.raw.get('decay', {}).get('window')
    window = tuple(window) if window else None
    traj = run(cfg.initial_profile(), params, solver)
    report = build_report(traj, params, exponents=pairs, window=window)

    rows = []
    stats = {}
    for q, theta in pairs:
        slope = report.fitted_exponents[f"q={q},theta={theta}"]
        expected = predicted_slope(params.alpha, q, theta)
        rows.append({'q': q, 'theta': theta, 'slope': slope, 'predicted': expected,
                     'deviation': slope - expected})
        stats[f"slope(q={q:g},theta={theta})"] = slope
    write_rows_csv(out_dir / 'decay.csv', DECAY_COLUMNS, rows)
    write_report_csv(out_dir / 'report.csv', report)
    table = summary_table(f"decay (alpha={params.alpha:g}, nu={params.nu:g})", stats)
    return CommandResult(['decay.csv', 'report.csv'], stats, table)
