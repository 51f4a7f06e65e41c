"""
Norms, energy, weak-form residuals and fitted rates of solution trajectories.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve

from .burgers import HILBERT_COUPLING
from .evolve import PhysicsParams, Trajectory
from .grid import Profile, lp_norm, mass, to_spectral
from .operators import fractional_laplacian

logger = logging.getLogger(__name__)

ENTROPY_FLOOR = 1e-300
SPECTRAL_NOISE_FLOOR = 1e-14
MIN_FIT_SAMPLES = 5
UNDERSHOOT_RATIO = 1e-6
TIME_RULES = ('trapezoid', 'rectangle')
# |m| from which the cell-averaged log kernel uses its asymptotic series
_LOG_SERIES_FROM = 8


class FitError(ValueError):
    """Not enough usable samples for a least-squares fit."""


def h_half_seminorm(p: Profile) -> float:
    """sqrt(2L sum |xi_k| |c_k|^2); zero exactly for constants."""
    c = to_spectral(p).coeffs
    xi = np.abs(p.grid.frequencies)
    return float(math.sqrt(2.0 * p.grid.half_length * np.sum(xi * np.abs(c) ** 2)))


def interpolation_check(p: Profile) -> Tuple[float, float]:
    """(||rho||_2, 3 ||rho||_1^(1/2) ||rho||_(H^1/2)^(1/2))."""
    lhs = lp_norm(p, 2)
    rhs = 3.0 * math.sqrt(lp_norm(p, 1) * h_half_seminorm(p))
    return lhs, rhs


@dataclass(frozen=True)
class EnergyReport:
    e_trap: float
    e_interaction: float
    e_entropy: float

    @property
    def total(self) -> float:
        return self.e_trap + self.e_interaction + self.e_entropy


def _second_antiderivative(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    safe = np.where(ax > 0, ax, 1.0)
    return np.where(ax > 0, 0.5 * x * x * np.log(safe), 0.0) - 0.75 * x * x


def cell_log_kernel(offsets: np.ndarray, dx: float) -> np.ndarray:
    """
    Average of log|x - y| over two cells of width dx whose centres are m dx apart.

    Exact second difference of G(x) = x^2 log|x| / 2 - 3 x^2 / 4 for small
    |m|, asymptotic series log|m| - 1/(12 m^2) - 1/(60 m^4) - 1/(168 m^6) beyond.
    """
    m = np.asarray(offsets, dtype=float)
    am = np.abs(m)
    near = am < _LOG_SERIES_FROM
    out = np.empty_like(m)
    mn = m[near]
    out[near] = (_second_antiderivative(mn + 1) - 2.0 * _second_antiderivative(mn)
                 + _second_antiderivative(mn - 1))
    mf = am[~near]
    inv2 = 1.0 / (mf * mf)
    out[~near] = np.log(mf) - inv2 * (1.0 / 12 + inv2 * (1.0 / 60 + inv2 / 168))
    return out + math.log(dx)


def energy(p: Profile, gamma: float, nu: float, negativity_tolerance: float = 1e-10,
           coupling: float = 1.0) -> EnergyReport:
    """
    Trap, interaction and entropy parts of the free energy

        E = gamma/2 int x^2 rho - c/2 int int log|x - y| rho(x) rho(y) + nu int rho log rho.

    With c = HILBERT_COUPLING (1/pi) this is the energy dissipated by the
    alpha = 2 flow; c = 1 is the unnormalised form.  The density is read as
    piecewise constant on cells, so the singular interaction is integrated
    exactly cell by cell.

    Returns:
        An EnergyReport holding the three parts
    """
    values = p.values
    if values.min() < -negativity_tolerance:
        raise ValueError(f"energy needs nonnegative density, found min {values.min():.3e}")
    grid = p.grid
    dx = grid.dx
    x = np.asarray(grid.nodes)
    rho = np.where(values > 0, values, 0.0)

    e_trap = 0.5 * gamma * dx * float(np.sum(x * x * rho))

    positive = rho > ENTROPY_FLOOR
    e_entropy = nu * dx * float(np.sum(rho[positive] * np.log(rho[positive])))

    n = grid.n_points
    kernel = cell_log_kernel(np.arange(-(n - 1), n), dx)
    potential = fftconvolve(rho, kernel)[n - 1:2 * n - 1]
    e_interaction = -0.5 * coupling * dx * dx * float(np.dot(rho, potential))
    return EnergyReport(e_trap, e_interaction, e_entropy)


@dataclass(frozen=True)
class BumpTestFunction:
    """
    b(x) = exp(-1 / (1 - (x/R)^2)) (c0 + c1 x + c2 x^2) on |x| < R, zero outside.

    Used in space; the time factor of the weak form is cos^2(pi t / (2T)).
    """

    radius: float = 3.0
    coeffs: Tuple[float, float, float] = (1.0, 0.3, 0.1)

    def _bump(self, x: np.ndarray):
        s = np.asarray(x, dtype=float) / self.radius
        inside = np.abs(s) < 1
        gap = np.where(inside, 1.0 - s * s, 1.0)
        beta = np.where(inside, np.exp(-1.0 / gap), 0.0)
        d1 = beta * (-2.0 * s / gap ** 2) / self.radius
        d2 = beta * (4.0 * s * s / gap ** 4 - (2.0 + 6.0 * s * s) / gap ** 3) / self.radius ** 2
        return beta, d1, d2

    def _poly(self, x: np.ndarray):
        c0, c1, c2 = self.coeffs
        x = np.asarray(x, dtype=float)
        return c0 + c1 * x + c2 * x * x, c1 + 2.0 * c2 * x, 2.0 * c2 * np.ones_like(x)

    def value(self, x):
        beta, _, _ = self._bump(x)
        return beta * self._poly(x)[0]

    def first(self, x):
        beta, d1, _ = self._bump(x)
        q, q1, _ = self._poly(x)
        return d1 * q + beta * q1

    def second(self, x):
        beta, d1, d2 = self._bump(x)
        q, q1, q2 = self._poly(x)
        return d2 * q + 2.0 * d1 * q1 + beta * q2

    def kernel(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """(b'(x) - b'(y)) / (x - y), extended by b''(x) on the diagonal."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dxy = x - y
        diagonal = dxy == 0
        safe = np.where(diagonal, 1.0, dxy)
        return np.where(diagonal, self.second(x), (self.first(x) - self.first(y)) / safe)


def _interaction_terms(values: np.ndarray, x: np.ndarray, test: BumpTestFunction,
                       block: int = 256) -> np.ndarray:
    """sum_ij rho_i K_ij rho_j for every row of ``values``, assembled in row blocks."""
    out = np.zeros(values.shape[0])
    for start in range(0, len(x), block):
        rows = slice(start, start + block)
        k = test.kernel(x[rows, None], x[None, :])
        out += np.sum(values[:, rows] * (values @ k.T), axis=1)
    return out


def weak_residual(traj: Trajectory, params: PhysicsParams,
                  test: Optional[BumpTestFunction] = None, rule: str = 'trapezoid') -> float:
    """
    |int rho0 phi(0) + int int [rho phi_t + rho H rho phi_x - nu rho Lambda^alpha phi]|

    for phi(x, t) = cos^2(pi t / (2T)) b(x), T the final time of ``traj``.
    The nonlinear term is symmetrized,
    int rho H rho b' = 1/(2 pi) int int rho(x) rho(y) (b'(x) - b'(y)) / (x - y),
    and time integrals use the trapezoid rule on the recorded times. With
    rule='rectangle' the left endpoint rule is used instead; its error is
    first order in the recording step.

    Args:
        traj: trajectory with at least two snapshots
        params: alpha and viscosity of the equation being tested
        test: spatial test function, a bump on [-3, 3] by default
        rule: 'trapezoid' or 'rectangle' in time

    Returns:
        The absolute residual
    """
    test = test or BumpTestFunction()
    if rule not in TIME_RULES:
        raise ValueError(f"rule must be one of {TIME_RULES}, got '{rule}'")
    times = np.asarray(traj.times)
    if len(times) < 2:
        raise ValueError("weak_residual needs at least two snapshots")
    grid = traj.grid
    dx = grid.dx
    x = np.asarray(grid.nodes)
    values = traj.values()
    t_end = float(times[-1])

    b = test.value(x)
    lam_b = fractional_laplacian(Profile(grid, b), params.alpha).values
    pairing = dx * values @ b
    linear = dx * values @ lam_b
    nonlinear = dx * dx * _interaction_terms(values, x, test) / (2.0 * math.pi)

    psi = np.cos(0.5 * math.pi * times / t_end) ** 2
    dpsi = -0.5 * math.pi / t_end * np.sin(math.pi * times / t_end)
    integrand = dpsi * pairing + psi * (nonlinear - params.nu * linear)
    steps = np.diff(times)
    if rule == 'trapezoid':
        integral = float(np.sum(0.5 * steps * (integrand[1:] + integrand[:-1])))
    else:
        integral = float(np.sum(steps * integrand[:-1]))
    total = psi[0] * pairing[0] + integral
    return abs(total)


def analyticity_radius(p: Profile) -> Optional[float]:
    """
    Exponential decay rate r of |c_k| ~ A exp(-r |xi_k|), or None.

    Fits the middle half of the positive modes lying above the noise floor.
    """
    c = np.abs(to_spectral(p).coeffs)
    n = p.grid.n_points
    positive = np.arange(1, n // 2)
    magnitudes = c[positive]
    peak = c.max()
    if peak == 0:
        return None
    resolved = positive[magnitudes > SPECTRAL_NOISE_FLOOR * peak]
    if len(resolved) == 0:
        return None
    last = resolved[-1]
    band = np.arange(max(1, last // 4), max(1, 3 * last // 4) + 1)
    band = band[c[band] > SPECTRAL_NOISE_FLOOR * peak]
    if len(band) < MIN_FIT_SAMPLES:
        return None
    slope, _ = np.polyfit(p.grid.frequencies[band], np.log(c[band]), 1)
    return max(0.0, -float(slope))


def fit_powerlaw(times: Sequence[float], values: Sequence[float],
                 window: Optional[Tuple[float, float]] = None) -> float:
    """Least-squares slope of log(values) against log(times) inside the window."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = t > 0
    if window is not None:
        keep &= (t >= window[0]) & (t <= window[1])
    if np.count_nonzero(keep) < MIN_FIT_SAMPLES:
        raise FitError(f"need at least {MIN_FIT_SAMPLES} samples in the fit window, "
                       f"got {np.count_nonzero(keep)}")
    if np.any(v[keep] <= 0):
        raise FitError("values in the fit window must be positive")
    slope, _ = np.polyfit(np.log(t[keep]), np.log(v[keep]), 1)
    return float(slope)


def is_non_increasing(values: Sequence[float], rtol: float = 1e-6, atol: float = 0.0) -> bool:
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return True
    scale = np.maximum(np.abs(v[:-1]), np.abs(v[1:]))
    return bool(np.all(np.diff(v) <= rtol * scale + atol))


@dataclass
class DiagnosticsReport:
    times: np.ndarray
    mass: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    linf: np.ndarray
    h_half: np.ndarray
    min_value: np.ndarray
    energy: Optional[np.ndarray] = None
    analyticity_radius: Optional[List[Optional[float]]] = None
    fitted_exponents: Dict[str, float] = field(default_factory=dict)
    weak_residual: Optional[float] = None
    undershoot: List[bool] = field(default_factory=list)

    def columns(self) -> List[str]:
        cols = ['t', 'mass', 'l1', 'l2', 'linf', 'h_half', 'min_value']
        if self.energy is not None:
            cols.append('energy')
        if self.analyticity_radius is not None:
            cols.append('analyticity_radius')
        return cols

    def rows(self) -> List[Dict[str, Any]]:
        """One mapping per recorded time; unavailable radii are None."""
        out = []
        for i, t in enumerate(self.times):
            row = {
                't': float(t), 'mass': float(self.mass[i]), 'l1': float(self.l1[i]),
                'l2': float(self.l2[i]), 'linf': float(self.linf[i]),
                'h_half': float(self.h_half[i]), 'min_value': float(self.min_value[i]),
            }
            if self.energy is not None:
                row['energy'] = float(self.energy[i])
            if self.analyticity_radius is not None:
                row['analyticity_radius'] = self.analyticity_radius[i]
            out.append(row)
        return out


def _clamped(p: Profile) -> Tuple[Profile, bool]:
    """Clamp undershoots up to 1e-6 max to zero; flag anything deeper."""
    peak = float(np.abs(p.values).max())
    low = float(p.values.min())
    flagged = low < -UNDERSHOOT_RATIO * peak
    return p.with_values(np.maximum(p.values, 0.0)), flagged


def build_report(traj: Trajectory, params: Optional[PhysicsParams] = None,
                 with_energy: bool = False, with_radius: bool = False,
                 exponents: Sequence[Tuple[float, int]] = (),
                 window: Optional[Tuple[float, float]] = None,
                 with_weak_residual: bool = False) -> DiagnosticsReport:
    """
    Evaluate the per-time scalars of a trajectory.

    ``exponents`` lists (q, theta) pairs whose decay slopes are fitted over
    ``window``; the keys of ``fitted_exponents`` read ``q=<q>,theta=<theta>``.

    Args:
        traj: recorded snapshots
        params: needed for the energy and the weak residual
        with_energy: add the free-energy column
        with_radius: add the analyticity-radius column
        exponents: (q, theta) pairs to fit
        window: fitting window in time, default the last decade
        with_weak_residual: evaluate the weak-form residual of the whole run

    Returns:
        A DiagnosticsReport with one row per snapshot
    """
    profiles = traj.profiles
    report = DiagnosticsReport(
        times=np.asarray(traj.times),
        mass=np.array([mass(p) for p in profiles]),
        l1=np.array([lp_norm(p, 1) for p in profiles]),
        l2=np.array([lp_norm(p, 2) for p in profiles]),
        linf=np.array([lp_norm(p, np.inf) for p in profiles]),
        h_half=np.array([h_half_seminorm(p) for p in profiles]),
        min_value=np.array([float(p.values.min()) for p in profiles]),
    )
    clamped = [_clamped(p) for p in profiles]
    report.undershoot = [flag for _, flag in clamped]
    if any(report.undershoot):
        logger.warning("undershoot below -%g max at %d snapshots",
                       UNDERSHOOT_RATIO, sum(report.undershoot))
    if with_energy:
        if params is None:
            raise ValueError("energy needs physics parameters")
        report.energy = np.array([
            energy(q, params.gamma, params.nu, coupling=HILBERT_COUPLING).total for q, _ in clamped
        ])
    if with_radius:
        report.analyticity_radius = [analyticity_radius(p) for p in profiles]
    if exponents:
        # mild builds on this module
        from .mild import decay_exponent_fit
    for q, theta in exponents:
        key = f"q={q},theta={theta}"
        report.fitted_exponents[key] = decay_exponent_fit(traj, q, theta, window)
    if with_weak_residual:
        if params is None:
            raise ValueError("weak residual needs physics parameters")
        report.weak_residual = weak_residual(traj, params)
    return report
