"""
nlflux particles command - Dyson Brownian motion ensembles.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from pathlib import Path
from typing import List, Tuple

import click
import numpy as np

from ..core.config import ConfigError, RunConfig
from ..core.particles import (
    ParticleState,
    ensemble,
    ensemble_snapshots,
    equilibrium_density,
    initial_state,
    pooled_density,
    silverman_bandwidth,
)
from ..core.report import write_rows_csv
from .common import CommandResult, execute, run_options, summary_table


@click.command()
@run_options
def particles(config_path: str, out: str, seed: int, quiet: bool, verbose: bool):
    """
    Simulate interacting particles and compare their density with equilibrium.

    Member k of the ensemble uses seed + k.  Starting positions are
    particles.positions when given, else sorted normal samples drawn with
    the run seed.  Writes positions.csv, density.csv (pooled kernel estimate
    and, for gamma > 0, the mean-field equilibrium) and meta.yaml.
    With particles.burn_in the density pools every member's states from
    that time on, sampled every particles.sample_every steps.

    Exit codes:
    - 0: Success
    - 2: Configuration error
    - 5: Collision (ordering lost after repeated substep halving)

    Examples:

        nlflux particles --config configs/particles_pair.yaml

        nlflux particles --config configs/particles_ensemble.yaml --seed 7
    """
    execute('particles', _particles, config_path, out, seed, quiet, verbose)


def _start(cfg: RunConfig, section: dict) -> np.ndarray:
    n = int(section['n'])
    if 'positions' not in section:
        return initial_state(n, cfg.seed, float(section.get('spread', 1.0))).positions
    positions = np.asarray(section['positions'], dtype=float)
    if positions.size != n:
        raise ConfigError(f"{positions.size} positions listed for n={n}",
                          cfg.line('particles.positions'), 'particles.positions')
    try:
        return ParticleState(positions).positions
    except ValueError as e:
        raise ConfigError(str(e), cfg.line('particles.positions'), 'particles.positions') from e


def _run_members(cfg: RunConfig, section: dict, start: np.ndarray, seeds: List[int],
                 gamma: float, noise: bool) -> Tuple[List[ParticleState], List[ParticleState]]:
    t_end, dt = float(section['t_end']), float(section['dt'])
    if 'burn_in' not in section:
        finals = ensemble(start, seeds, t_end, dt, gamma, noise)
        return finals, finals
    burn_in = float(section['burn_in'])
    if burn_in > t_end:
        raise ConfigError(f"burn_in={burn_in} exceeds t_end={t_end}",
                          cfg.line('particles.burn_in'), 'particles.burn_in')
    members = ensemble_snapshots(start, seeds, t_end, dt, gamma, burn_in,
                                 int(section.get('sample_every', 1)), noise)
    return [m[-1] for m in members], [s for m in members for s in m]


def _particles(cfg: RunConfig, out_dir: Path) -> CommandResult:
    section = cfg.section('particles')
    gamma = float(section.get('gamma', 1.0))
    noise = bool(section.get('noise', True))
    members = int(section.get('ensemble', 1))
    start = _start(cfg, section)
    seeds = [cfg.seed + k for k in range(members)]
    finals, samples = _run_members(cfg, section, start, seeds, gamma, noise)

    write_rows_csv(out_dir / 'positions.csv', ['member', 'seed', 'index', 'position'], (
        {'member': k, 'seed': s.rng_seed, 'index': j, 'position': float(x)}
        for k, s in enumerate(finals) for j, x in enumerate(s.positions)
    ))

    bandwidth = section.get('bandwidth')
    if bandwidth is None:
        pooled = np.concatenate([s.positions for s in finals])
        if pooled.size < 2 or np.std(pooled) == 0:
            raise ConfigError("particles.bandwidth is required for a single particle",
                              cfg.line('particles'), 'particles.bandwidth')
        bandwidth = silverman_bandwidth(pooled)
    grid = cfg.grid
    density = pooled_density(samples, grid, float(bandwidth))
    reference = equilibrium_density(grid, gamma) if gamma > 0 else None
    columns = ['x', 'empirical'] + (['equilibrium'] if reference is not None else [])
    write_rows_csv(out_dir / 'density.csv', columns, (
        {'x': float(x), 'empirical': float(density.values[j]),
         'equilibrium': None if reference is None else float(reference.values[j])}
        for j, x in enumerate(grid.nodes)
    ))

    gap_values = np.concatenate([np.diff(s.positions) for s in finals]) if start.size > 1 else None
    stats = {
        'particles': int(start.size),
        'members': members,
        'samples': len(samples),
        't_end': float(finals[0].time),
        'bandwidth': float(bandwidth),
    }
    if gap_values is not None:
        stats['min_gap'] = float(gap_values.min())
        stats['mean_gap'] = float(gap_values.mean())
    if reference is not None:
        stats['l1_to_equilibrium'] = float(grid.dx * np.abs(density.values - reference.values).sum())
    table = summary_table(f"particles (N={start.size}, gamma={gamma:g})", stats)
    return CommandResult(['positions.csv', 'density.csv'], stats, table)
