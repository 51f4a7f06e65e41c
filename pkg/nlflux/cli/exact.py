"""
nlflux exact command - Exact solutions of the critical problem by characteristics.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from pathlib import Path

import click
import numpy as np

from ..core.burgers import HILBERT_COUPLING, CharParams, HorizonError, horizon, steady_state, trace_solution
from ..core.config import ConfigError, RunConfig
from ..core.grid import mass
from ..core.report import write_rows_csv
from .common import CommandResult, execute, run_options, summary_table

SOLUTION_COLUMNS = ['t', 'x', 'rho', 'u', 'preimage_re', 'preimage_im', 'steady_state']
MASS_COLUMNS = ['t', 'grid_mass', 'tail_mass', 'total_mass', 'steady_gap']


@click.command()
@run_options
def exact(config_path: str, out: str, seed: int, quiet: bool, verbose: bool):
    """
    Trace the exact alpha = 1 solution at the times listed under exact.times.

    Writes solution.csv (rho, u and the characteristic preimage at every
    node and time), mass.csv (grid mass, far-field tails and, for gamma > 0,
    the largest gap to the steady state over |x| <= exact.compare_window)
    and meta.yaml.

    Exit codes:
    - 0: Success
    - 2: Configuration error
    - 4: A requested time is at or beyond the blow-up horizon
    - 5: Numerical failure (inversion did not converge)

    Examples:

        nlflux exact --config configs/exact_confined.yaml
    """
    execute('exact', _exact, config_path, out, seed, quiet, verbose)


def char_params(cfg: RunConfig, section: str) -> CharParams:
    """Characteristic parameters from physics plus ``<section>.mu``."""
    params = cfg.require_physics()
    if params.alpha != 1:
        raise ConfigError(f"exact solutions need alpha = 1, got {params.alpha}",
                          cfg.line('physics.alpha'), 'physics.alpha')
    mu = float(cfg.section(section).get('mu', 0.0))
    try:
        return CharParams(params.nu, params.gamma, mu)
    except ValueError as e:
        raise ConfigError(str(e), cfg.line(f'{section}.mu'), f'{section}.mu') from e


def _exact(cfg: RunConfig, out_dir: Path) -> CommandResult:
    section = cfg.section('exact')
    cp = char_params(cfg, 'exact')
    p0 = cfg.initial_profile()
    if p0.values.min() < -cp.mu - 1e-12:
        raise ConfigError(f"initial data dips to {p0.values.min():.6g}, below -mu = {-cp.mu:g}",
                          cfg.line('exact.mu') or cfg.line('initial_data'), 'exact.mu')
    times = sorted(float(t) for t in section['times'])
    limit = horizon(cp)
    if times[-1] >= limit:
        raise HorizonError(limit, times[-1])

    window = float(section.get('compare_window', 3.0))
    x = np.asarray(p0.grid.nodes)
    inside = np.abs(x) <= window
    limit_profile = None
    if cp.gamma > 0:
        limit_profile = steady_state(x, cp.nu, cp.gamma, coupling=HILBERT_COUPLING, mass=mass(p0))

    solution_rows = []
    mass_rows = []
    for t in times:
        sol = trace_solution(p0, t, cp)
        for j, foot in enumerate(sol.preimages):
            solution_rows.append({
                't': t, 'x': float(x[j]), 'rho': float(sol.rho[j]), 'u': float(sol.u[j]),
                'preimage_re': foot.re, 'preimage_im': foot.im,
                'steady_state': None if limit_profile is None else float(limit_profile[j]),
            })
        gap = None
        if limit_profile is not None:
            gap = float(np.max(np.abs(sol.rho[inside] - limit_profile[inside])))
        mass_rows.append({
            't': t, 'grid_mass': sol.grid_mass, 'tail_mass': sol.tail_mass,
            'total_mass': sol.total_mass, 'steady_gap': gap,
        })
    write_rows_csv(out_dir / 'solution.csv', SOLUTION_COLUMNS, solution_rows)
    write_rows_csv(out_dir / 'mass.csv', MASS_COLUMNS, mass_rows)

    last = mass_rows[-1]
    stats = {
        'horizon': limit,
        'times': len(times),
        'initial_mass': mass(p0),
        'total_mass_final': last['total_mass'],
    }
    if last['steady_gap'] is not None:
        stats['steady_gap_final'] = last['steady_gap']
    table = summary_table(f"exact (nu={cp.nu:g}, gamma={cp.gamma:g}, mu={cp.mu:g})", stats)
    return CommandResult(['solution.csv', 'mass.csv'], stats, table)
