"""
Dyson Brownian motion

    d lambda_j = dB_j / sqrt(N) + 1/(pi N) sum_{k != j} dt / (lambda_j - lambda_k) - gamma lambda_j dt

by Euler-Maruyama with an order-preserving substep guard, and the kernel
density estimate used to compare particle clouds with the mean-field density.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from .burgers import HILBERT_COUPLING, steady_state
from .grid import Grid, Profile

logger = logging.getLogger(__name__)

MAX_HALVINGS = 20
SILVERMAN_FACTOR = 1.06
_KDE_CHUNK = 256


class CollisionError(Exception):
    """Ordering could not be kept after repeated substep halving."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"near-collision at t={time:.6g}: ordering lost after "
                         f"{MAX_HALVINGS} halvings")


@dataclass(frozen=True, eq=False)
class ParticleState:
    positions: np.ndarray
    time: float = 0.0
    rng_seed: int = 0
    step_index: int = 0

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float)
        if positions.ndim != 1 or positions.size < 1:
            raise ValueError("positions must be a non-empty 1-D array")
        if np.any(np.diff(positions) <= 0):
            raise ValueError("positions must be strictly increasing")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be unsigned, got {self.rng_seed}")
        positions.setflags(write=False)
        object.__setattr__(self, 'positions', positions)

    @property
    def n(self) -> int:
        return self.positions.size


def initial_state(n: int, seed: int, spread: float = 1.0) -> ParticleState:
    """n i.i.d. normal positions of standard deviation ``spread``, sorted."""
    if n < 1:
        raise ValueError(f"need at least one particle, got {n}")
    rng = np.random.default_rng(seed)
    return ParticleState(np.sort(spread * rng.standard_normal(n)), rng_seed=seed)


def _drift(x: np.ndarray, gamma: float) -> np.ndarray:
    n = x.size
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    return np.sum(1.0 / diff, axis=1) / (math.pi * n) - gamma * x


def _noise_generator(seed: int, step_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=step_index))


def sde_step(s: ParticleState, dt: float, gamma: float, noise: bool = True) -> ParticleState:
    """
    Advance by dt in Euler-Maruyama substeps.

    A substep that breaks the ordering is halved and retried; accepted
    substeps double back towards dt.  Noise for step k is drawn from a
    Philox stream keyed by (rng_seed, k).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.array(s.positions)
    n = x.size
    rng = _noise_generator(s.rng_seed, s.step_index) if noise else None
    elapsed = 0.0
    h = dt
    halvings = 0
    while elapsed < dt:
        h = min(h, dt - elapsed)
        proposal = x + h * _drift(x, gamma)
        if rng is not None:
            proposal += math.sqrt(h / n) * rng.standard_normal(n)
        if n > 1 and np.any(np.diff(proposal) <= 0):
            halvings += 1
            if halvings >= MAX_HALVINGS:
                raise CollisionError(s.time + elapsed)
            h *= 0.5
            continue
        if halvings:
            logger.debug("substep %.3e accepted after %d halvings", h, halvings)
        halvings = 0
        x = proposal
        elapsed += h
        h = min(2.0 * h, dt)
    return ParticleState(x, s.time + dt, s.rng_seed, s.step_index + 1)


def simulate(state: ParticleState, t_end: float, dt: float, gamma: float,
             noise: bool = True, record_every: int = 1) -> List[ParticleState]:
    """Uniform steps up to t_end; returns the recorded states, first and last included."""
    if t_end < 0:
        raise ValueError(f"t_end must be nonnegative, got {t_end}")
    if record_every < 1:
        raise ValueError(f"record_every must be positive, got {record_every}")
    recorded = [state]
    if t_end == 0:
        return recorded
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    step = t_end / n_steps
    for i in range(1, n_steps + 1):
        state = sde_step(state, step, gamma, noise)
        if i % record_every == 0 or i == n_steps:
            recorded.append(state)
    logger.info("particles: N=%d, %d steps to t=%g", state.n, n_steps, state.time)
    return recorded


def ensemble(positions: Sequence[float], seeds: Sequence[int], t_end: float, dt: float,
             gamma: float, noise: bool = True) -> List[ParticleState]:
    """Final states of independent runs from the same start, one per seed."""
    return [
        simulate(ParticleState(positions, rng_seed=seed), t_end, dt, gamma, noise)[-1]
        for seed in seeds
    ]


def ensemble_snapshots(positions: Sequence[float], seeds: Sequence[int], t_end: float,
                       dt: float, gamma: float, burn_in: float, record_every: int = 1,
                       noise: bool = True) -> List[List[ParticleState]]:
    """
    Recorded states of each member from ``burn_in`` on.

    Args:
        positions: common starting configuration
        seeds: one noise seed per member
        t_end: final time of every run
        dt: step length
        gamma: confinement strength
        burn_in: states recorded before this time are discarded
        record_every: steps between recorded states
        noise: Brownian forcing on or off

    Returns:
        One list per member, ordered in time and ending with the final state.
        Pooling all of them averages the ensemble over the sampled window.
    """
    if not 0 <= burn_in <= t_end:
        raise ValueError(f"burn_in must lie in [0, t_end], got {burn_in}")
    cutoff = burn_in - 1e-9 * max(1.0, burn_in)
    members = []
    for seed in seeds:
        recorded = simulate(ParticleState(positions, rng_seed=seed), t_end, dt, gamma,
                            noise, record_every)
        members.append([s for s in recorded if s.time >= cutoff])
    logger.info("ensemble: %d members, %d states each from t=%g",
                len(members), len(members[0]) if members else 0, burn_in)
    return members


def silverman_bandwidth(positions: np.ndarray) -> float:
    """1.06 sigma N^(-1/5)."""
    sigma = float(np.std(positions))
    if sigma == 0:
        raise ValueError("zero sample spread; pass an explicit bandwidth")
    return SILVERMAN_FACTOR * sigma * positions.size ** (-0.2)


def empirical_density(s: ParticleState, grid: Grid, bandwidth: Optional[float] = None) -> Profile:
    """
    Gaussian kernel density estimate on a periodic grid.

    Each particle's kernel is wrapped onto the torus and normalized to unit
    discrete mass, so the estimate has unit mass to rounding.
    """
    if bandwidth is None:
        bandwidth = silverman_bandwidth(s.positions)
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    x = np.asarray(grid.nodes)
    period = 2.0 * grid.half_length
    density = np.zeros(grid.n_points)
    for start in range(0, s.n, _KDE_CHUNK):
        centers = s.positions[start:start + _KDE_CHUNK]
        d = np.mod(x[None, :] - centers[:, None] + grid.half_length, period) - grid.half_length
        w = np.exp(-0.5 * (d / bandwidth) ** 2)
        w /= grid.dx * w.sum(axis=1, keepdims=True)
        density += w.sum(axis=0)
    return Profile(grid, density / s.n)


def pooled_density(states: Sequence[ParticleState], grid: Grid,
                   bandwidth: Optional[float] = None) -> Profile:
    """Average of the per-member density estimates of an ensemble."""
    if not states:
        raise ValueError("empty ensemble")
    values = np.mean([empirical_density(s, grid, bandwidth).values for s in states], axis=0)
    return Profile(grid, values)


def equilibrium_density(grid: Grid, gamma: float) -> Profile:
    """Mean-field equilibrium sqrt((2 gamma / pi - gamma^2 x^2)_+) of the particle system."""
    return Profile(grid, steady_state(np.asarray(grid.nodes), 0.0, gamma, coupling=HILBERT_COUPLING))


def gaps(s: ParticleState) -> np.ndarray:
    return np.diff(s.positions)
