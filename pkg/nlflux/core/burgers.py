"""
Exact solutions of the critical case alpha = 1 by complex characteristics.

The Stieltjes transform f = u - i rho of the density solves a complex
Burgers equation whose characteristics are explicit:

    Z(w, t) = a w + b f0(w) - i nu d,
    a = exp(-gamma t),  b = sinh(gamma t) / gamma,  d = (1 - exp(-gamma t)) / gamma.

Inverting Z(., t) at a real point x gives the trace rho(x, t) = P rho0(w) e^(gamma t).
The inversion is done either by nested monotone root finds (always
bracketed) or by Newton on the holomorphic map with a warm start.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass
import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .grid import Grid, Profile
from .operators import (
    UpperHalfPoint,
    stieltjes_derivative_many,
    stieltjes_many,
)

logger = logging.getLogger(__name__)

MAX_DOUBLINGS = 200
SMALL_GAMMA_T = 1e-6
NEWTON_MAX_ITER = 50
TAIL_NODES = 24
HILBERT_COUPLING = 1.0 / math.pi


class HorizonError(ValueError):
    """Requested time at or beyond the guaranteed lifespan."""

    def __init__(self, horizon: float, t: float):
        self.horizon = horizon
        self.t = t
        super().__init__(f"t={t:.6g} is not below the horizon T={horizon:.6g}")


class InversionError(Exception):
    """Root bracket could not be established."""

    def __init__(self, z: complex, message: str):
        self.z = z
        super().__init__(f"inversion at z={z}: {message}")


class BranchError(Exception):
    """Neither square-root branch gives a point of the upper half plane."""


@dataclass(frozen=True)
class CharParams:
    nu: float
    gamma: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if self.nu < 0 or self.gamma < 0 or self.mu < 0:
            raise ValueError("nu, gamma and mu must be nonnegative")
        if self.nu == 0 and self.mu != 0:
            raise ValueError("nu = 0 is only supported with mu = 0")
        if self.nu > 0 and not self.mu < self.nu:
            raise ValueError(f"mu must lie in [0, nu), got mu={self.mu}, nu={self.nu}")


@dataclass(frozen=True)
class CharCoeffs:
    a: float
    b: float
    d: float
    t: float

    @classmethod
    def at(cls, t: float, gamma: float) -> 'CharCoeffs':
        if t < 0:
            raise ValueError(f"t must be nonnegative, got {t}")
        gt = gamma * t
        a = math.exp(-gt)
        if gt < SMALL_GAMMA_T:
            b = t * (1.0 + gt * gt / 6.0)
            d = t * (1.0 - 0.5 * gt)
        else:
            b = math.sinh(gt) / gamma
            d = -math.expm1(-gt) / gamma
        return cls(a, b, d, t)


@dataclass(frozen=True, eq=False)
class TraceSolution:
    """Boundary values of the exact solution on the nodes of a grid."""

    grid: Grid
    t: float
    rho: np.ndarray
    u: np.ndarray
    preimages: Tuple[UpperHalfPoint, ...]
    tail_mass: float = 0.0

    @property
    def x_values(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def grid_mass(self) -> float:
        return float(self.grid.dx * np.sum(self.rho))

    @property
    def total_mass(self) -> float:
        """Grid mass plus the far-field tails beyond the truncation."""
        return self.grid_mass + self.tail_mass

    def profile(self) -> Profile:
        return Profile(self.grid, self.rho)


def horizon(cp: CharParams) -> float:
    """T = ln(2 nu / mu - 1) / gamma; infinite when mu = 0 or gamma = 0."""
    if cp.mu == 0 or cp.gamma == 0:
        return math.inf
    return math.log(2.0 * cp.nu / cp.mu - 1.0) / cp.gamma


def _check_time(t: float, cp: CharParams):
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    limit = horizon(cp)
    if t >= limit:
        raise HorizonError(limit, t)


def _f0(p0: Profile, w: complex) -> complex:
    return complex(stieltjes_many(p0, np.array([w]))[0])


def _f0_prime(p0: Profile, w: complex) -> complex:
    return complex(stieltjes_derivative_many(p0, np.array([w]))[0])


def _point(w: Union[complex, UpperHalfPoint]) -> complex:
    z = w.z if isinstance(w, UpperHalfPoint) else complex(w)
    if not z.imag > 0:
        raise ValueError(f"characteristic foot must satisfy Im w > 0, got {z}")
    return z


def forward_map(w: Union[complex, UpperHalfPoint], t: float, p0: Profile, cp: CharParams) -> complex:
    """Position Z(w, t) of the characteristic issued from w."""
    w = _point(w)
    _check_time(t, cp)
    if t == 0:
        return w
    c = CharCoeffs.at(t, cp.gamma)
    return c.a * w + c.b * _f0(p0, w) - 1j * cp.nu * c.d


def forward_map_hyperbolic(w: Union[complex, UpperHalfPoint], t: float, p0: Profile,
                           cp: CharParams) -> complex:
    """Z(w, t) = (w + i nu/gamma) cosh(gamma t) + (g0(w) - i nu) sinh(gamma t)/gamma - i nu/gamma."""
    w = _point(w)
    _check_time(t, cp)
    gamma = cp.gamma
    if gamma == 0:
        return (_f0(p0, w) - 1j * cp.nu) * t + w
    g0 = _f0(p0, w) - gamma * w
    shift = 1j * cp.nu / gamma
    return ((w + shift) * math.cosh(gamma * t)
            + (g0 - 1j * cp.nu) * math.sinh(gamma * t) / gamma - shift)


def jacobian(w: Union[complex, UpperHalfPoint], t: float, p0: Profile, cp: CharParams) -> float:
    """|Z_w|^2 = (a + b dR)^2 + (b dP)^2, positive along admissible characteristics."""
    w = _point(w)
    _check_time(t, cp)
    c = CharCoeffs.at(t, cp.gamma)
    return float(abs(c.a + c.b * _f0_prime(p0, w)) ** 2)


def height_residual(x: float, y: float, target: float, c: CharCoeffs, p0: Profile,
                    nu: float) -> float:
    """
    Im Z(x + iy) - target = a y - b P rho0(x, y) - nu d - target.

    Negative as y -> 0+ for data above -mu and positive for large y.
    """
    f = _f0(p0, complex(x, y))
    return c.a * y + c.b * f.imag - nu * c.d - target


def _solve_height(x: float, target: float, c: CharCoeffs, p0: Profile, nu: float,
                  z: complex) -> float:
    def residual(y):
        return height_residual(x, y, target, c, p0, nu)

    upper = max(target + nu * c.d, 0.0) / c.a + 1.0
    lower = min(1.0, 0.5 * upper)
    for _ in range(MAX_DOUBLINGS):
        if residual(upper) > 0:
            break
        upper *= 2.0
    else:
        raise InversionError(z, f"no upper bracket for Im w at x={x}")
    for _ in range(MAX_DOUBLINGS):
        if residual(lower) < 0:
            break
        lower *= 0.5
    else:
        raise InversionError(z, f"no lower bracket for Im w at x={x}; "
                                f"data may violate -mu <= rho0 with mu < nu")
    return brentq(residual, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _foot_range(p0: Profile, cp: CharParams) -> Tuple[float, float]:
    """Where real feet may lie: anywhere with diffusion, inside the data support without."""
    if cp.nu > 0:
        return -math.inf, math.inf
    nodes = p0.grid.nodes
    return float(nodes[0]), float(nodes[-1])


def _invert_bracketed(z: complex, c: CharCoeffs, p0: Profile, cp: CharParams) -> complex:
    """Nested monotone root finds: Im Z = Im z for each x, then Re Z = Re z in x."""
    z1, z2 = z.real, z.imag
    x_min, x_max = _foot_range(p0, cp)

    def horizontal(x):
        y = _solve_height(x, z2, c, p0, cp.nu, z)
        return c.a * x + c.b * _f0(p0, complex(x, y)).real - z1

    center = min(max(z1 / c.a, x_min), x_max)
    width = 1.0
    for _ in range(MAX_DOUBLINGS):
        lo, hi = max(center - width, x_min), min(center + width, x_max)
        if horizontal(lo) < 0 < horizontal(hi):
            break
        if lo == x_min and hi == x_max:
            raise InversionError(z, f"no bracket for Re w in [{x_min}, {x_max}]")
        width *= 2.0
    else:
        raise InversionError(z, "no bracket for Re w")
    logger.debug("x bracket [%g, %g] for z=%s", lo, hi, z)
    x = brentq(horizontal, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    return complex(x, _solve_height(x, z2, c, p0, cp.nu, z))


def _invert_newton(z: complex, c: CharCoeffs, p0: Profile, cp: CharParams,
                   guess: complex) -> Optional[complex]:
    w = complex(guess)
    if not w.imag > 0:
        return None
    scale = 1.0 + abs(z)
    for _ in range(NEWTON_MAX_ITER):
        residual = c.a * w + c.b * _f0(p0, w) - 1j * cp.nu * c.d - z
        if abs(residual) <= 1e-13 * scale:
            return w
        slope = c.a + c.b * _f0_prime(p0, w)
        if slope == 0:
            return None
        step = residual / slope
        for _ in range(60):
            if (w - step).imag > 0:
                break
            step *= 0.5
        else:
            return None
        w -= step
    return None


def invert_map(z: complex, t: float, p0: Profile, cp: CharParams,
               guess: Optional[complex] = None) -> UpperHalfPoint:
    """
    Foot w of the characteristic reaching z at time t.

    Args:
        z: target point with Im z >= 0
        t: time in (0, horizon)
        p0: initial density
        cp: viscosity, confinement and lower-bound level
        guess: optional starting point; Newton is tried first and the
            bracketed solve is the fallback

    Returns:
        The preimage as an interior point of the upper half plane.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValueError(f"target must satisfy Im z >= 0, got {z}")
    if not t > 0:
        raise ValueError(f"invert_map needs t > 0, got {t}")
    _check_time(t, cp)
    c = CharCoeffs.at(t, cp.gamma)
    w = _invert_newton(z, c, p0, cp, guess) if guess is not None else None
    if w is None:
        w = _invert_bracketed(z, c, p0, cp)
    return UpperHalfPoint.of(w)


def complex_solution(z: complex, t: float, p0: Profile, cp: CharParams) -> complex:
    """f(z, t) = f0(Z^-1(z, t)) e^(gamma t) on the closed upper half plane."""
    if t == 0:
        return _f0(p0, _point(z))
    w = invert_map(z, t, p0, cp)
    return _f0(p0, w.z) * math.exp(cp.gamma * t)


def _density_at(x: float, t: float, p0: Profile, cp: CharParams,
                guess: Optional[complex]) -> Tuple[float, complex]:
    w = invert_map(complex(x, 0.0), t, p0, cp, guess=guess).z
    return -_f0(p0, w).imag * math.exp(cp.gamma * t), w


def _tail_mass(p0: Profile, t: float, cp: CharParams, rho_first: float,
               edge_guesses: Tuple[complex, complex]) -> float:
    grid = p0.grid
    L = grid.half_length
    right_edge, _ = _density_at(L, t, p0, cp, edge_guesses[1])
    # periodic sum over [-L, L) versus the trapezoid rule over [-L, L]
    total = 0.5 * grid.dx * (right_edge - rho_first)
    nodes, weights = roots_legendre(TAIL_NODES)
    s = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    for sign, guess in ((1.0, edge_guesses[1]), (-1.0, edge_guesses[0])):
        warm = guess
        # from the edge outwards so the warm start follows the characteristic feet
        for k in np.argsort(-s):
            x = sign * L / s[k]
            value, warm = _density_at(x, t, p0, cp, warm)
            total += weights[k] * value * L / s[k] ** 2
    return float(total)


def trace_solution(p0: Profile, t: float, cp: CharParams) -> TraceSolution:
    """
    Recover rho(x, t) and u(x, t) at every grid node.

    Nodes are inverted left to right, each Newton solve warm-started from
    the previous preimage.
    """
    if not t > 0:
        raise ValueError(f"trace_solution needs t > 0, got {t}")
    _check_time(t, cp)
    grid = p0.grid
    growth = math.exp(cp.gamma * t)
    feet = np.empty(grid.n_points, dtype=complex)
    guess = None
    for j, x in enumerate(grid.nodes):
        try:
            feet[j] = invert_map(complex(x, 0.0), t, p0, cp, guess=guess).z
        except InversionError as e:
            raise InversionError(e.z, f"{e} (grid node x={x:.6g})") from e
        guess = feet[j]
    f = stieltjes_many(p0, feet) * growth
    rho = -f.imag
    u = f.real
    tail = 0.0
    if cp.nu > 0:
        tail = _tail_mass(p0, t, cp, float(rho[0]), (complex(feet[0]), complex(feet[-1])))
    floor = -cp.mu * growth - 1e-9
    if rho.min() < floor:
        logger.warning("trace density %.3e below the bound %.3e", rho.min(), floor)
    logger.info("trace at t=%g: grid mass %.10f, tails %.3e", t, grid.dx * rho.sum(), tail)
    return TraceSolution(grid, t, rho, u,
                         tuple(UpperHalfPoint.of(w) for w in feet), tail)


def steady_state(x: Union[float, np.ndarray], nu: float, gamma: float,
                 coupling: float = 1.0, mass: float = 1.0) -> Union[float, np.ndarray]:
    """
    Stationary density of the confined flux with velocity coupling * p.v. int rho(y)/(x-y) dy.

    With B = gamma^2 x^2 - nu^2 - 2 gamma coupling mass,

        rho_inf = (sqrt(sqrt(B^2 + 4 gamma^2 x^2 nu^2) - B) - sqrt(2) nu) / (sqrt(2) pi coupling).

    ``coupling = 1`` is the classical unnormalized form; the normalized Hilbert
    transform of the evolution equation corresponds to HILBERT_COUPLING.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu}")
    xs = np.asarray(x, dtype=float)
    b = gamma ** 2 * xs ** 2 - nu ** 2 - 2.0 * gamma * coupling * mass
    inner = np.sqrt(b ** 2 + 4.0 * gamma ** 2 * xs ** 2 * nu ** 2) - b
    value = (np.sqrt(np.maximum(inner, 0.0)) - math.sqrt(2.0) * nu) / (math.sqrt(2.0) * math.pi * coupling)
    value = np.maximum(value, 0.0)
    if np.ndim(x) == 0:
        return float(value)
    return value


def longtime_limit_w(z: complex, nu: float, gamma: float, mass: float = 1.0) -> complex:
    """
    Limit of exp(-gamma t) Z^-1(z, t) as t -> infinity.

    w = M / (A - sqrt(A^2 - 2 gamma pi M)) with A = gamma pi z + i nu pi,
    the root of the quadratic lying in the upper half plane.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValueError(f"z must satisfy Im z >= 0, got {z}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    big_a = gamma * math.pi * z + 1j * nu * math.pi
    root = np.sqrt(complex(big_a * big_a - 2.0 * gamma * math.pi * mass))
    for candidate in (big_a - root, big_a + root):
        if candidate != 0:
            w = mass / candidate
            if w.imag > 0:
                return complex(w)
    raise BranchError(f"no root in the upper half plane at z={z}")


def longtime_density(x: Union[float, np.ndarray], nu: float, gamma: float,
                     mass: float = 1.0) -> Union[float, np.ndarray]:
    """-Im(M / (pi w(x))): the density reached by the exact solution as t -> infinity."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([-(mass / (math.pi * longtime_limit_w(xi, nu, gamma, mass))).imag for xi in xs])
    if np.ndim(x) == 0:
        return float(out[0])
    return out
