"""
Linear operators of the flux equation as Fourier multipliers, plus
real-line quadrature oracles.

Periodic operators act on :class:`~nlflux.core.grid.Profile` through the
multiplier convention of :mod:`nlflux.core.grid`.  The Poisson, conjugate
Poisson and Stieltjes transforms instead treat the samples as the
piecewise-linear interpolant on the real line, extended by zero, and
integrate the kernels exactly against it.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass
import logging
from typing import Any, Optional, Tuple, Union

import numpy as np

from .grid import Grid, Profile, lp_norm, to_physical, to_spectral, SpectralField

logger = logging.getLogger(__name__)

# |q| below which log1p and its companion use power series
_SERIES_RADIUS = 0.05
_SERIES_TERMS = 16

ComplexLike = Union[complex, 'UpperHalfPoint']


def hilbert_multiplier(grid: Grid) -> np.ndarray:
    """-i sgn(xi_k), with the Nyquist mode annihilated."""
    m = -1j * np.sign(grid.frequencies)
    m[grid.nyquist_index] = 0.0
    return m


def derivative_multiplier(grid: Grid, order: int = 1) -> np.ndarray:
    m = (1j * grid.frequencies) ** order
    if order % 2:
        m[grid.nyquist_index] = 0.0
    return m


def hilbert_spectral(p: Profile) -> Profile:
    """Periodic Hilbert transform; maps the mean to zero."""
    return to_physical(to_spectral(p).apply(hilbert_multiplier(p.grid)))


def derivative(p: Profile, order: int = 1) -> Profile:
    """Spectral derivative of integer order."""
    if order < 0 or int(order) != order:
        raise ValueError(f"derivative order must be a nonnegative integer, got {order}")
    if order == 0:
        return p
    return to_physical(to_spectral(p).apply(derivative_multiplier(p.grid, int(order))))


def _check_alpha(alpha: float, allow_zero: bool = True):
    low_ok = alpha >= 0 if allow_zero else alpha > 0
    if not (low_ok and alpha <= 2):
        bound = '[0, 2]' if allow_zero else '(0, 2]'
        raise ValueError(f"alpha must lie in {bound}, got {alpha}")


def fractional_laplacian(p: Profile, alpha: float) -> Profile:
    """Multiplier |xi_k|^alpha, with |0|^0 = 1 so alpha = 0 is the identity."""
    _check_alpha(alpha)
    return to_physical(to_spectral(p).apply(np.abs(p.grid.frequencies) ** alpha))


@dataclass(frozen=True)
class HeatPropagator:
    """Fractional heat semigroup exp(-nu t Lambda^alpha) on a grid."""

    params: Any
    grid: Grid

    def __post_init__(self):
        _check_alpha(self.params.alpha)
        if not self.params.nu > 0:
            raise ValueError(f"nu must be positive, got {self.params.nu}")

    @property
    def symbol(self) -> np.ndarray:
        return self.params.nu * np.abs(self.grid.frequencies) ** self.params.alpha

    def multiplier(self, t: float) -> np.ndarray:
        return np.exp(-t * self.symbol)


def heat_step(p: Profile, t: float, prop: HeatPropagator) -> Profile:
    """
    Apply the fractional heat semigroup for time t.

    Args:
        p: profile to smooth
        t: elapsed time, nonnegative
        prop: propagator built for the grid of p

    Returns:
        exp(-nu t Lambda^alpha) p; p itself when t == 0
    """
    if t < 0:
        raise ValueError(f"heat_step needs t >= 0, got {t}")
    if t == 0:
        return p
    return to_physical(to_spectral(p).apply(prop.multiplier(t)))


@dataclass(frozen=True)
class UpperHalfPoint:
    """A point of the closed upper half plane; im == 0 only when flagged as boundary."""

    re: float
    im: float
    boundary: bool = False

    def __post_init__(self):
        if self.im < 0 or (self.im == 0 and not self.boundary):
            raise ValueError(f"point {self.re} + {self.im}i is not in the open upper half plane")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def of(cls, z: complex) -> 'UpperHalfPoint':
        return cls(float(np.real(z)), float(np.imag(z)))


def _as_interior(z: ComplexLike) -> complex:
    if isinstance(z, UpperHalfPoint):
        z = z.z
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"evaluation point must satisfy Im z > 0, got {z}")
    return z


def _log1p_and_companion(q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Return log1p(q) and phi(q) = (1 + q) log1p(q) / q - 1.

    Both lose all precision by direct evaluation when |q| is small, which
    is the common case (segments far from the evaluation point).
    """
    lam = np.empty_like(q)
    phi = np.empty_like(q)
    small = np.abs(q) < _SERIES_RADIUS
    if np.any(small):
        qs = q[small]
        # Horner in alternating form: sum_{k>=1} (-1)^(k+1) c_k q^k
        acc_lam = np.zeros_like(qs)
        acc_phi = np.zeros_like(qs)
        for k in range(_SERIES_TERMS, 0, -1):
            acc_lam = 1.0 / k - qs * acc_lam
            acc_phi = 1.0 / (k * (k + 1)) - qs * acc_phi
        lam[small] = qs * acc_lam
        phi[small] = qs * acc_phi
    big = ~small
    if np.any(big):
        qb = q[big]
        lb = np.log(1.0 + qb)
        lam[big] = lb
        phi[big] = (1.0 + qb) * lb / qb - 1.0
    return lam, phi


def _padded_samples(p0: Profile) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(p0.grid.nodes)
    dx = p0.grid.dx
    nodes = np.concatenate(([x[0] - dx], x, [x[-1] + dx]))
    rho = np.concatenate(([0.0], p0.values, [0.0]))
    return nodes, rho


def stieltjes_many(p0: Profile, z: np.ndarray) -> np.ndarray:
    """
    Vectorized f0(z) = (1/pi) int rho0(s) / (z - s) ds for Im z > 0.

    On each segment [s_j, s_j + dx] with rho linear,
    int = rho_j log1p(q) + m_j dx phi(q), q = dx / (z - s_{j+1}).

    Args:
        p0: sampled density, taken piecewise linear and zero off the grid
        z: evaluation points, all strictly inside the upper half plane

    Returns:
        Complex array of f0 values shaped like ``z``
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag <= 0):
        raise ValueError("all evaluation points must satisfy Im z > 0")
    nodes, rho = _padded_samples(p0)
    dx = p0.grid.dx
    left = rho[:-1]
    slope_dx = rho[1:] - rho[:-1]
    right_nodes = nodes[1:]
    out = np.empty(z.shape, dtype=complex)
    for i, zi in enumerate(z):
        q = dx / (zi - right_nodes)
        lam, phi = _log1p_and_companion(q)
        out[i] = np.sum(left * lam + slope_dx * phi) / np.pi
    return out


def stieltjes_derivative_many(p0: Profile, z: np.ndarray) -> np.ndarray:
    """
    f0'(z) = -(1/pi) int rho0(s) / (z - s)^2 ds, integrated exactly per segment:
    rho_j dx / ((z - s_j)(z - s_{j+1})) + m_j (q - log1p(q)).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag <= 0):
        raise ValueError("all evaluation points must satisfy Im z > 0")
    nodes, rho = _padded_samples(p0)
    dx = p0.grid.dx
    left = rho[:-1]
    slope = (rho[1:] - rho[:-1]) / dx
    out = np.empty(z.shape, dtype=complex)
    for i, zi in enumerate(z):
        w_left = zi - nodes[:-1]
        w_right = zi - nodes[1:]
        q = dx / w_right
        rest = np.empty_like(q)
        small = np.abs(q) < _SERIES_RADIUS
        if np.any(small):
            qs = q[small]
            acc = np.zeros_like(qs)
            for k in range(_SERIES_TERMS + 1, 1, -1):
                acc = 1.0 / k - qs * acc
            rest[small] = qs * qs * acc
        big = ~small
        if np.any(big):
            rest[big] = q[big] - np.log(1.0 + q[big])
        out[i] = -np.sum(left * dx / (w_left * w_right) + slope * rest) / np.pi
    return out


def stieltjes(p0: Profile, z: ComplexLike) -> complex:
    """Stieltjes transform f0(z) = R rho0 - i P rho0; Im f0 <= 0 when rho0 >= 0."""
    return complex(stieltjes_many(p0, np.array([_as_interior(z)]))[0])


def poisson_extend(p0: Profile, pt: ComplexLike) -> Tuple[float, float]:
    """Return (P rho0(x, y), R rho0(x, y)) at pt = x + iy."""
    f = stieltjes(p0, pt)
    return -f.imag, f.real


def hilbert_pv_quadrature(p: Profile, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Real-line Hilbert transform (1/pi) p.v. int rho(y) / (x - y) dy.

    Written as (1/pi) int_0^inf (rho(x - s) - rho(x + s)) / s ds; the
    integrand is even in s, so the midpoint rule on s = (m - 1/2) dx pairs
    the two sides of the singularity and is second order.  Samples off the
    grid are linearly interpolated; rho vanishes outside the grid.
    """
    grid = p.grid
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = grid.nodes[0], grid.nodes[-1]
    if np.any(xs < lo) or np.any(xs > hi):
        raise ValueError(f"evaluation points must lie within [{lo}, {hi}]")
    dx = grid.dx
    s = dx * (np.arange(1, 2 * grid.n_points + 1) - 0.5)
    out = np.empty_like(xs)
    for i, xi in enumerate(xs):
        minus = np.interp(xi - s, grid.nodes, p.values, left=0.0, right=0.0)
        plus = np.interp(xi + s, grid.nodes, p.values, left=0.0, right=0.0)
        out[i] = dx * np.sum((minus - plus) / s) / np.pi
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def kernel_norm(ell: float, alpha: float, q: Union[float, str], t: float = 1.0,
                nu: float = 1.0, n_points: int = 2 ** 16,
                half_length: Optional[float] = None) -> float:
    """
    ||Lambda^ell G_alpha(., t)||_{L^q} by inverse-transform quadrature.

    The grid half-length defaults to 256 (nu t)^(1/alpha), i.e. it moves
    with the kernel's natural length scale.

    Args:
        ell: order of the fractional derivative, nonnegative
        alpha: dissipation order in (0, 2]
        q: Lebesgue exponent, a number or 'inf'
        t: time, positive
        nu: viscosity
        n_points: quadrature nodes
        half_length: grid half-length override

    Returns:
        The L^q norm as a float
    """
    _check_alpha(alpha, allow_zero=False)
    if ell < 0:
        raise ValueError(f"ell must be nonnegative, got {ell}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if half_length is None:
        half_length = 256.0 * (nu * t) ** (1.0 / alpha)
    grid = Grid(n_points, half_length)
    xi = np.abs(grid.frequencies)
    coeffs = xi ** ell * np.exp(-nu * t * xi ** alpha) / (2.0 * half_length)
    return lp_norm(to_physical(SpectralField(grid, coeffs)), q)


def kernel_constant(ell: float, alpha: float, q: Union[float, str], nu: float = 1.0) -> float:
    """||Lambda^ell G_alpha(., 1)||_{L^q}."""
    return kernel_norm(ell, alpha, q, t=1.0, nu=nu)


def kernel_scaling_exponent(ell: float, alpha: float, q: Union[float, str]) -> float:
    """Exponent e with ||Lambda^ell G(., t)||_q = t^e ||Lambda^ell G(., 1)||_q."""
    q = float(q)
    inv_q = 0.0 if np.isinf(q) else 1.0 / q
    return -(ell + 1.0) / alpha + inv_q / alpha
