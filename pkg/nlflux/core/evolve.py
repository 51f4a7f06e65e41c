"""
Time integration of the nonlocal flux equation

    d_t rho + d_x(rho H rho) = -nu Lambda^alpha rho

on the periodic grid: a direct integrating-factor RK2 solver, the viscous
splitting schemes (Trotter and Strang), the inviscid Dyson substep, and the
space-time rescaling that removes a harmonic confinement.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass, replace
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import Grid, Profile, SpectralField, lp_norm, mollify, to_physical, to_spectral
from .operators import (
    HeatPropagator,
    derivative_multiplier,
    heat_step,
    hilbert_multiplier,
    hilbert_spectral,
)

logger = logging.getLogger(__name__)

SCHEMES = ('direct', 'splitting', 'strang')
DYSON_VARIANTS = ('spectral', 'characteristics')
CFL_NUMBER = 0.5
POSITIVITY_FLOOR = 1e-8


class BlowUpError(Exception):
    """Non-finite state encountered during time stepping."""

    def __init__(self, time: Optional[float], message: str = "non-finite values in state"):
        self.time = time
        where = f" at t={time:.6g}" if time is not None else ""
        super().__init__(f"blow-up{where}: {message}")


class UnsupportedConfinementError(ValueError):
    """gamma > 0 requested on the periodic spectral transport."""


@dataclass(frozen=True)
class PhysicsParams:
    alpha: float
    nu: float
    gamma: float = 0.0

    def __post_init__(self):
        if not 0 <= self.alpha <= 2:
            raise ValueError(f"alpha must lie in [0, 2], got {self.alpha}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")


@dataclass(frozen=True)
class SolverConfig:
    """
    Time stepping options.

    ``transport=False`` switches the nonlinear term off; it exists so the
    linear propagation can be checked in isolation.  ``mollify_width``
    smooths the initial data of the splitting schemes; unset, the data are
    used as sampled.
    """

    dt: float
    t_end: float
    scheme: str = 'direct'
    dyson_substep: str = 'spectral'
    dealias: bool = True
    record_every: int = 1
    mollify_width: Optional[float] = None
    transport: bool = True
    check_stability: bool = True
    negativity_tolerance: float = 1e-10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if self.t_end > 0 and self.dt > self.t_end * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds t_end={self.t_end}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got '{self.scheme}'")
        if self.dyson_substep not in DYSON_VARIANTS:
            raise ValueError(
                f"dyson_substep must be one of {DYSON_VARIANTS}, got '{self.dyson_substep}'"
            )
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Snapshots of a run; times strictly increasing, one shared grid."""

    times: np.ndarray
    profiles: Tuple[Profile, ...]

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        profiles = tuple(self.profiles)
        if times.ndim != 1 or len(times) != len(profiles) or len(times) == 0:
            raise ValueError("times and profiles must be non-empty and aligned")
        if np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        grid = profiles[0].grid
        if any(p.grid != grid for p in profiles):
            raise ValueError("all snapshots must share one grid")
        times.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'profiles', profiles)

    def __len__(self):
        return len(self.times)

    @property
    def grid(self) -> Grid:
        return self.profiles[0].grid

    @property
    def final(self) -> Profile:
        return self.profiles[-1]

    def values(self) -> np.ndarray:
        """Snapshot values stacked as a (time, node) array."""
        return np.vstack([p.values for p in self.profiles])

    @classmethod
    def from_values(cls, grid: Grid, times: Sequence[float], values: np.ndarray) -> 'Trajectory':
        return cls(np.asarray(times), tuple(Profile(grid, v) for v in values))


# -- spectral kernels on x-referenced coefficient arrays -----------------------

def _values(c: np.ndarray, grid: Grid) -> np.ndarray:
    return (np.fft.ifft(c * grid.phase) * grid.n_points).real


def _coeffs(v: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.fft(v) * grid.phase / grid.n_points


def _dealias_mask(grid: Grid) -> np.ndarray:
    return (np.abs(grid.wavenumbers) < grid.n_points / 3.0).astype(float)


def flux_coefficients(c: np.ndarray, grid: Grid, dealias: bool) -> np.ndarray:
    """Coefficients of d_x(rho H rho)."""
    if dealias:
        mask = _dealias_mask(grid)
        c = c * mask
    product = _values(c, grid) * _values(c * hilbert_multiplier(grid), grid)
    product_c = _coeffs(product, grid)
    if dealias:
        product_c = product_c * mask
    return derivative_multiplier(grid) * product_c


def nonlinear_flux(p: Profile, params: PhysicsParams, dealias: bool = True) -> Profile:
    """d_x(rho H rho), product in physical space, derivative in spectral space."""
    if params.gamma > 0:
        raise UnsupportedConfinementError(
            "the confinement term -gamma x is not periodic; use run_confined or the "
            "characteristics solver"
        )
    c = to_spectral(p).coeffs
    return to_physical(SpectralField(p.grid, flux_coefficients(c, p.grid, dealias)))


def stable_dt(p: Profile) -> float:
    """Transport CFL bound 0.5 dx / max(1, ||H rho||_inf, ||rho||_inf)."""
    speed = max(1.0, lp_norm(hilbert_spectral(p), np.inf), lp_norm(p, np.inf))
    return CFL_NUMBER * p.grid.dx / speed


def _check_finite(values: np.ndarray, time: Optional[float]):
    if not np.all(np.isfinite(values)):
        raise BlowUpError(time)


def step_direct(p: Profile, dt: float, params: PhysicsParams, cfg: SolverConfig,
                time: Optional[float] = None) -> Profile:
    """
    One integrating-factor RK2 step.

    With E = exp(-nu dt |xi|^alpha) and N the transport term:
        c1    = E (c + dt N(c))
        c_new = E c + dt/2 (E N(c) + N(c1))

    Args:
        p: current state
        dt: step length
        params: alpha and viscosity; gamma must be 0
        cfg: transport and dealiasing switches
        time: time after the step, used in blow-up reports

    Returns:
        The state after one step
    """
    if params.gamma > 0:
        raise UnsupportedConfinementError("step_direct does not support gamma > 0")
    grid = p.grid
    expo = HeatPropagator(params, grid).multiplier(dt)
    c = to_spectral(p).coeffs
    if cfg.transport:
        n0 = -flux_coefficients(c, grid, cfg.dealias)
        c1 = expo * (c + dt * n0)
        n1 = -flux_coefficients(c1, grid, cfg.dealias)
        c_new = expo * c + 0.5 * dt * (expo * n0 + n1)
    else:
        c_new = expo * c
    values = _values(c_new, grid)
    _check_finite(values, time)
    return Profile(grid, values)


def _dyson_spectral(p: Profile, h: float, cfg: SolverConfig) -> Profile:
    """SSP-RK3 substeps of d_t w = -d_x(w H w) under the transport CFL."""
    grid = p.grid
    n_sub = max(1, math.ceil(h / stable_dt(p) - 1e-12))
    tau = h / n_sub
    c = to_spectral(p).coeffs

    def rhs(a):
        return -flux_coefficients(a, grid, cfg.dealias)

    for _ in range(n_sub):
        c1 = c + tau * rhs(c)
        c2 = 0.75 * c + 0.25 * (c1 + tau * rhs(c1))
        c = c / 3.0 + 2.0 / 3.0 * (c2 + tau * rhs(c2))
    values = _values(c, grid)
    _check_finite(values, None)
    logger.debug("dyson substep h=%g in %d stages", h, n_sub)
    return Profile(grid, values)


def _dyson_characteristics(p: Profile, h: float) -> Profile:
    from .burgers import CharParams, trace_solution

    trace = trace_solution(p, h, CharParams(nu=0.0, gamma=0.0, mu=0.0))
    return Profile(p.grid, trace.rho)


def _check_nonnegative(p: Profile, tolerance: float, what: str):
    low = float(p.values.min())
    if low < -tolerance:
        raise ValueError(f"{what} requires nonnegative data, found min {low:.3e}")


def dyson_step(p: Profile, h: float, cfg: SolverConfig) -> Profile:
    """
    Solve the inviscid Dyson equation d_t w + d_x(w H w) = 0 over [0, h].

    The ``characteristics`` variant needs strictly positive data
    (min > 1e-8 max) and falls back to ``spectral`` otherwise.
    """
    if h < 0:
        raise ValueError(f"substep length must be nonnegative, got {h}")
    if h == 0:
        return p
    _check_nonnegative(p, cfg.negativity_tolerance, "dyson_step")
    if cfg.dyson_substep == 'characteristics':
        peak = float(p.values.max())
        if peak > 0 and float(p.values.min()) > POSITIVITY_FLOOR * peak:
            return _dyson_characteristics(p, h)
        logger.warning("characteristics substep needs strictly positive data; "
                       "falling back to the spectral substep")
    return _dyson_spectral(p, h, cfg)


def step_splitting(p: Profile, h: float, params: PhysicsParams, cfg: SolverConfig,
                   time: Optional[float] = None) -> Profile:
    """One viscous-splitting step: G(h) D(h), or G(h/2) D(h) G(h/2) for Strang."""
    if params.gamma > 0:
        raise UnsupportedConfinementError("step_splitting does not support gamma > 0")
    _check_nonnegative(p, cfg.negativity_tolerance, "step_splitting")
    prop = HeatPropagator(params, p.grid)
    try:
        if cfg.scheme == 'strang':
            half = heat_step(p, 0.5 * h, prop)
            moved = dyson_step(half, h, cfg) if cfg.transport else half
            return heat_step(moved, 0.5 * h, prop)
        moved = dyson_step(p, h, cfg) if cfg.transport else p
        return heat_step(moved, h, prop)
    except BlowUpError as e:
        raise BlowUpError(time, "non-finite values in the Dyson substep") from e


def dilate(p: Profile, lam: float, alpha: float) -> Profile:
    """
    rho_lam(x) = lam^(alpha - 1) rho(lam x), sampled on the grid of half-length L / lam.

    The dilation commutes with the evolution: rho_lam at time t equals the
    dilation of rho at time lam^alpha t.
    """
    return Profile(p.grid.scaled(lam), lam ** (alpha - 1.0) * p.values)


def _step_count(cfg: SolverConfig) -> Tuple[int, float]:
    n_steps = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    return n_steps, cfg.t_end / n_steps


def run(p0: Profile, params: PhysicsParams, cfg: SolverConfig,
        observer: Optional[Callable[[float, Profile], None]] = None) -> Trajectory:
    """
    Advance p0 to cfg.t_end, recording every ``record_every`` steps and the
    final state.  ``observer`` is called on each recorded snapshot.

    Args:
        p0: initial density
        params: physical parameters; gamma > 0 is routed through the rescaling
        cfg: step, end time, scheme and recording cadence
        observer: optional callback taking (t, profile)

    Returns:
        The recorded Trajectory, starting at t = 0
    """
    if params.gamma > 0:
        if params.alpha == 2:
            return run_confined(p0, params, cfg, observer)
        raise UnsupportedConfinementError(
            f"gamma > 0 needs alpha = 2 (rescaling) or the characteristics solver; "
            f"got alpha={params.alpha}"
        )
    times: List[float] = [0.0]
    profiles: List[Profile] = [p0]
    if observer:
        observer(0.0, p0)
    if cfg.t_end == 0:
        return Trajectory(times, profiles)

    n_steps, dt = _step_count(cfg)
    if cfg.scheme == 'direct':
        if cfg.check_stability and dt > stable_dt(p0) * (1 + 1e-12):
            raise ValueError(
                f"dt={dt:.3e} violates the transport CFL bound {stable_dt(p0):.3e}"
            )
        state = p0

        def advance(q, t):
            return step_direct(q, dt, params, cfg, time=t)
    else:
        state = mollify(p0, cfg.mollify_width) if cfg.mollify_width else p0

        def advance(q, t):
            return step_splitting(q, dt, params, cfg, time=t)

    logger.info("run: scheme=%s alpha=%g nu=%g n=%d steps=%d dt=%.3e",
                cfg.scheme, params.alpha, params.nu, p0.grid.n_points, n_steps, dt)
    for i in range(1, n_steps + 1):
        t = i * dt
        state = advance(state, t)
        if i % cfg.record_every == 0 or i == n_steps:
            times.append(t)
            profiles.append(state)
            if observer:
                observer(t, state)
    return Trajectory(times, profiles)


def rescale_gamma_to_zero(p: Profile, tau: float, gamma: float) -> Tuple[Profile, float]:
    """
    Map a gamma = 0 snapshot at time tau to the confined problem.

    rho(x, t) = sqrt(s) rho~(x sqrt(s), tau),  s = 1 + 2 gamma tau,
    t = log(s) / (2 gamma).  Samples outside the grid are taken as zero.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    s = 1.0 + 2.0 * gamma * tau
    t = math.log1p(2.0 * gamma * tau) / (2.0 * gamma)
    if tau == 0:
        return p, 0.0
    nodes = np.asarray(p.grid.nodes)
    spline = CubicSpline(nodes, p.values, extrapolate=False)
    sampled = np.nan_to_num(spline(nodes * math.sqrt(s)), nan=0.0)
    return Profile(p.grid, math.sqrt(s) * sampled), t


def run_confined(p0: Profile, params: PhysicsParams, cfg: SolverConfig,
                 observer: Optional[Callable[[float, Profile], None]] = None) -> Trajectory:
    """
    gamma > 0 with alpha = 2 through the rescaling: evolve the gamma = 0
    problem up to tau_end = (exp(2 gamma t_end) - 1) / (2 gamma) with step
    cfg.dt in tau, then map every snapshot back.
    """
    if params.alpha != 2:
        raise UnsupportedConfinementError("the rescaling applies to alpha = 2 only")
    gamma = params.gamma
    free = replace(params, gamma=0.0)
    tau_end = math.expm1(2.0 * gamma * cfg.t_end) / (2.0 * gamma)
    tau_cfg = replace(cfg, t_end=tau_end, dt=min(cfg.dt, tau_end) if tau_end > 0 else cfg.dt)
    free_traj = run(p0, free, tau_cfg)
    times: List[float] = []
    profiles: List[Profile] = []
    for tau, snap in zip(free_traj.times, free_traj.profiles):
        mapped, t = rescale_gamma_to_zero(snap, float(tau), gamma)
        times.append(t)
        profiles.append(mapped)
        if observer:
            observer(t, mapped)
    return Trajectory(times, profiles)
