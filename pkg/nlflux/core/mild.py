"""
Mild solutions of the subcritical problem (1 < alpha <= 2).

The Duhamel map

    S(rho)(t) = G(t) * rho0 - int_0^t d_x G(t - s) * (rho H rho)(s) ds

is evaluated on a time mesh graded towards t = 0, with the linear part
exact in Fourier space and the flux interpolated linearly in time between
mesh nodes (product trapezoid).  Picard iteration of S, the X_T norm and
the smallness quantity of the contraction argument live here too, along
with late-time decay rate fits.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass, field
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .diagnostics import fit_powerlaw
from .evolve import PhysicsParams, SolverConfig, Trajectory, flux_coefficients, step_direct
from .grid import Profile, SpectralField, lp_norm, to_physical, to_spectral
from .operators import HeatPropagator, derivative, heat_step

logger = logging.getLogger(__name__)

RULES = ('trapezoid', 'rectangle')
DIVERGENCE_STREAK = 3
SMALLNESS_LEVEL = 0.1
_SERIES_BELOW = 1e-2


class DivergenceError(Exception):
    """Picard gaps grew on consecutive iterations."""

    def __init__(self, report: 'ContractionReport'):
        self.report = report
        super().__init__(f"Picard iteration diverged; gaps {report.iterate_gaps}")


@dataclass(frozen=True)
class XTNorm:
    sup_base: float
    sup_weighted: float
    T: float

    @property
    def value(self) -> float:
        return max(self.sup_base, self.sup_weighted)


@dataclass
class ContractionReport:
    a_measured: float
    iterate_gaps: List[float] = field(default_factory=list)
    converged: bool = False
    c_empirical: Optional[float] = None
    smallness_ok: Optional[bool] = None

    @property
    def iterations(self) -> int:
        return len(self.iterate_gaps)


def _check_subcritical(alpha: float):
    if not 1 < alpha <= 2:
        raise ValueError(f"mild-solution machinery needs 1 < alpha <= 2, got {alpha}")


def graded_mesh(T: float, m: int, alpha: float) -> np.ndarray:
    """t_j = T (j/m)^(alpha / (alpha - 1)), j = 0..m."""
    _check_subcritical(alpha)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if m < 1:
        raise ValueError(f"mesh needs at least one interval, got m={m}")
    mesh = T * (np.arange(m + 1) / m) ** (alpha / (alpha - 1.0))
    mesh[-1] = T
    return mesh


def _weight_series(u: np.ndarray, terms) -> np.ndarray:
    acc = np.zeros_like(u)
    for coef in reversed(terms):
        acc = coef - u * acc
    return acc


def _psi_left(u: np.ndarray) -> np.ndarray:
    """int_0^1 v exp(-u v) dv = (1 - (1 + u) e^-u) / u^2."""
    small = u < _SERIES_BELOW
    safe = np.where(small, 1.0, u)
    exact = (1.0 - (1.0 + safe) * np.exp(-safe)) / safe ** 2
    return np.where(small, _weight_series(u, (1 / 2, 1 / 3, 1 / 8, 1 / 30)), exact)


def _psi_right(u: np.ndarray) -> np.ndarray:
    """int_0^1 (1 - v) exp(-u v) dv = (u - 1 + e^-u) / u^2."""
    small = u < _SERIES_BELOW
    safe = np.where(small, 1.0, u)
    exact = (safe + np.expm1(-safe)) / safe ** 2
    return np.where(small, _weight_series(u, (1 / 2, 1 / 6, 1 / 24, 1 / 120)), exact)


def _psi_flat(u: np.ndarray) -> np.ndarray:
    """int_0^1 exp(-u v) dv."""
    small = u < _SERIES_BELOW
    safe = np.where(small, 1.0, u)
    return np.where(small, _weight_series(u, (1.0, 1 / 2, 1 / 6, 1 / 24)), -np.expm1(-safe) / safe)


def duhamel_apply(traj: Trajectory, p0: Profile, params: PhysicsParams,
                  rule: str = 'trapezoid', dealias: bool = True) -> Trajectory:
    """
    S(traj) sampled on the times of ``traj``, which must start at 0.

    On [t_j, t_j+1] of length h the flux F is either linear between its
    endpoint values (``trapezoid``) or frozen at the left value
    (``rectangle``), and the heat factor exp(-lam (t_i - s)) is integrated
    exactly against it, lam = nu |xi|^alpha.

    Args:
        traj: current iterate, first time 0
        p0: initial density
        params: alpha in (1, 2], viscosity and confinement
        rule: 'trapezoid' or 'rectangle'
        dealias: apply the 2/3 rule to the flux

    Returns:
        The mapped trajectory on the same times
    """
    _check_subcritical(params.alpha)
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}, got '{rule}'")
    times = np.asarray(traj.times)
    if times[0] != 0:
        raise ValueError("duhamel_apply needs a time mesh starting at 0")
    if traj.grid != p0.grid:
        raise ValueError("trajectory and initial data live on different grids")
    grid = p0.grid
    prop = HeatPropagator(params, grid)
    lam = prop.symbol
    flux = np.array([flux_coefficients(to_spectral(p).coeffs, grid, dealias)
                     for p in traj.profiles])
    c0 = to_spectral(p0).coeffs
    steps = np.diff(times)

    out = [p0]
    for i in range(1, len(times)):
        h = steps[:i, None]
        decay = np.exp(-lam[None, :] * (times[i] - times[1:i + 1, None]))
        u = lam[None, :] * h
        if rule == 'trapezoid':
            integral = decay * h * (_psi_left(u) * flux[:i] + _psi_right(u) * flux[1:i + 1])
        else:
            integral = decay * h * _psi_flat(u) * flux[:i]
        coeffs = prop.multiplier(times[i]) * c0 - integral.sum(axis=0)
        out.append(to_physical(SpectralField(grid, coeffs)))
    return Trajectory(times, out)


def x_t_norm(traj: Trajectory, alpha: float) -> XTNorm:
    """
    sup over recorded t > 0 of ||f||_{1/(alpha-1)} and of
    t^((alpha-1)/(2 alpha)) ||f||_{2/(alpha-1)}.
    """
    _check_subcritical(alpha)
    base_q = 1.0 / (alpha - 1.0)
    weight_exp = (alpha - 1.0) / (2.0 * alpha)
    sup_base = 0.0
    sup_weighted = 0.0
    for t, p in zip(traj.times, traj.profiles):
        if t <= 0:
            continue
        sup_base = max(sup_base, lp_norm(p, base_q))
        sup_weighted = max(sup_weighted, t ** weight_exp * lp_norm(p, 2.0 * base_q))
    return XTNorm(sup_base, sup_weighted, float(traj.times[-1]))


def x_t_distance(first: Trajectory, second: Trajectory, alpha: float) -> float:
    if len(first) != len(second) or np.any(first.times != second.times):
        raise ValueError("trajectories must share their time mesh")
    diff = Trajectory(first.times, tuple(
        Profile(a.grid, a.values - b.values) for a, b in zip(first.profiles, second.profiles)
    ))
    return x_t_norm(diff, alpha).value


def measure_smallness(p0: Profile, params: PhysicsParams, T: float, m: int = 64) -> float:
    """sup over the graded mesh of t^((alpha-1)/(2 alpha)) ||G(t) * rho0||_{2/(alpha-1)}."""
    mesh = graded_mesh(T, m, params.alpha)
    prop = HeatPropagator(params, p0.grid)
    q = 2.0 / (params.alpha - 1.0)
    weight_exp = (params.alpha - 1.0) / (2.0 * params.alpha)
    return max(t ** weight_exp * lp_norm(heat_step(p0, t, prop), q) for t in mesh[1:])


def picard_solve(p0: Profile, params: PhysicsParams, T: float, max_iter: int = 50,
                 tol: float = 1e-8, m: int = 64, rule: str = 'trapezoid',
                 enforce_smallness: bool = False) -> Tuple[Trajectory, ContractionReport]:
    """
    Iterate rho_{k+1} = S(rho_k) from rho_0 = 0 until the X_T gap falls below tol.

    The ratio of successive gaps divided by the smallness quantity a gives
    the empirical Lipschitz factor C; a <= 0.1 / C is reported, and only
    enforced with ``enforce_smallness``.

    Args:
        p0: initial density
        params: physical parameters, alpha in (1, 2]
        T: final time
        max_iter: iteration cap
        tol: X_T gap at which the iteration stops
        m: number of graded mesh intervals
        rule: Duhamel quadrature rule
        enforce_smallness: raise when the measured a exceeds 0.1 / C

    Returns:
        The last iterate and the contraction report
    """
    _check_subcritical(params.alpha)
    mesh = graded_mesh(T, m, params.alpha)
    report = ContractionReport(a_measured=measure_smallness(p0, params, T, m))
    zero = Profile.zeros(p0.grid)
    current = Trajectory(mesh, tuple(zero for _ in mesh))
    growing = 0
    for k in range(max_iter):
        nxt = duhamel_apply(current, p0, params, rule)
        gap = x_t_distance(nxt, current, params.alpha)
        report.iterate_gaps.append(gap)
        logger.debug("picard iteration %d: gap %.3e", k + 1, gap)
        current = nxt
        if len(report.iterate_gaps) >= 3:
            _assess_smallness(report, enforce_smallness)
        if gap < tol:
            report.converged = True
            break
        if len(report.iterate_gaps) >= 2 and gap > report.iterate_gaps[-2]:
            growing += 1
            if growing >= DIVERGENCE_STREAK:
                raise DivergenceError(report)
        else:
            growing = 0
    logger.info("picard: %d iterations, converged=%s, a=%.3e",
                report.iterations, report.converged, report.a_measured)
    return current, report


def _assess_smallness(report: ContractionReport, enforce: bool):
    gaps = report.iterate_gaps
    # the first gap measures S(0) against 0, not a contraction
    ratios = [b / a for a, b in zip(gaps[1:-1], gaps[2:]) if a > 0]
    if not ratios or report.a_measured <= 0:
        return
    report.c_empirical = max(ratios) / report.a_measured
    ok = report.a_measured <= SMALLNESS_LEVEL / report.c_empirical
    if ok == report.smallness_ok:
        return
    report.smallness_ok = ok
    if not ok:
        message = (f"smallness a={report.a_measured:.3e} exceeds "
                   f"{SMALLNESS_LEVEL}/C with C={report.c_empirical:.3e}")
        if enforce:
            raise ValueError(message)
        logger.warning(message)


def direct_on_mesh(p0: Profile, params: PhysicsParams, mesh: np.ndarray,
                   max_dt: float) -> Trajectory:
    """Direct solver sampled exactly on an arbitrary mesh, substeps no longer than max_dt."""
    cfg = SolverConfig(dt=max_dt, t_end=max(float(mesh[-1]), max_dt))
    profiles = [p0]
    state = p0
    for t0, t1 in zip(mesh[:-1], mesh[1:]):
        n_sub = max(1, math.ceil((t1 - t0) / max_dt - 1e-9))
        dt = (t1 - t0) / n_sub
        for k in range(n_sub):
            state = step_direct(state, dt, params, cfg, time=t0 + (k + 1) * dt)
        profiles.append(state)
    return Trajectory(mesh, profiles)


def decay_exponent_fit(traj: Trajectory, q: float, theta: int,
                       window: Optional[Tuple[float, float]] = None) -> float:
    """
    Log-log slope of ||d_x^theta rho(t)||_q over a late-time window.

    The default window is the last decade [t_end / 10, t_end].

    Returns:
        The fitted slope
    """
    if int(theta) != theta or theta < 0:
        raise ValueError(f"theta must be a nonnegative integer, got {theta}")
    t_end = float(traj.times[-1])
    if window is None:
        window = (t_end / 10.0, t_end)
    norms = [lp_norm(derivative(p, int(theta)), q) for p in traj.profiles]
    return fit_powerlaw(traj.times, norms, window)
