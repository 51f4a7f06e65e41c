"""
Uniform periodic grid, field containers and the discrete Fourier contract.

The real line is truncated to the torus [-L, L) sampled at n equispaced
nodes x_j = -L + j*dx.  Fourier coefficients are referenced to the
physical coordinate, so that

    rho(x_j) = sum_k c_k exp(i * xi_k * x_j),   xi_k = pi * k / L,

and c_0 is the mean of the samples.  Because x_0 = -L this differs from the
raw FFT by the phase (-1)^k.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

from dataclasses import dataclass
from functools import cached_property
import logging
from typing import Callable, Union

import numpy as np
from scipy.ndimage import convolve1d

logger = logging.getLogger(__name__)

MOLLIFIER_CUTOFF = 6.0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-half_length, half_length)."""

    n_points: int
    half_length: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 8 or self.n_points % 2:
            raise ValueError(f"n_points must be an even integer >= 8, got {self.n_points}")
        if not (self.half_length > 0 and np.isfinite(self.half_length)):
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        object.__setattr__(self, 'n_points', int(self.n_points))
        object.__setattr__(self, 'half_length', float(self.half_length))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.half_length + self.dx * np.arange(self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers k in FFT storage order."""
        k = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).round().astype(int)
        k.setflags(write=False)
        return k

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Physical frequencies xi_k = pi k / L in FFT storage order."""
        xi = np.pi * self.wavenumbers / self.half_length
        xi.setflags(write=False)
        return xi

    @cached_property
    def phase(self) -> np.ndarray:
        """(-1)^k, the shift between raw FFT output and x-referenced coefficients."""
        s = np.where(self.wavenumbers % 2 == 0, 1.0, -1.0)
        s.setflags(write=False)
        return s

    @cached_property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    def scaled(self, lam: float) -> 'Grid':
        """Grid with the same node count and half-length L/lam."""
        if lam <= 0:
            raise ValueError(f"scale factor must be positive, got {lam}")
        return Grid(self.n_points, self.half_length / lam)


@dataclass(frozen=True, eq=False)
class Profile:
    """Real density samples on a grid; the discrete rho(., t)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> 'Profile':
        return cls(grid, func(np.asarray(grid.nodes)))

    @classmethod
    def zeros(cls, grid: Grid) -> 'Profile':
        return cls(grid, np.zeros(grid.n_points))

    def with_values(self, values: np.ndarray) -> 'Profile':
        return Profile(self.grid, values)

    def __repr__(self):
        return (f"Profile(n={self.grid.n_points}, L={self.grid.half_length}, "
                f"min={self.values.min():.3e}, max={self.values.max():.3e})")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a profile, stored in FFT order."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex)
        if coeffs.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} coefficients, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)

    def coefficient(self, k: int) -> complex:
        """Coefficient of integer wavenumber k in [-n/2, n/2)."""
        n = self.grid.n_points
        if not -n // 2 <= k < n // 2:
            raise ValueError(f"wavenumber {k} outside [{-n // 2}, {n // 2})")
        return complex(self.coeffs[k % n])

    def apply(self, multiplier: np.ndarray) -> 'SpectralField':
        return SpectralField(self.grid, self.coeffs * multiplier)


def to_spectral(p: Profile) -> SpectralField:
    """Discrete Fourier coefficients with coeffs(0) equal to the sample mean."""
    grid = p.grid
    coeffs = np.fft.fft(p.values) * grid.phase / grid.n_points
    return SpectralField(grid, coeffs)


def to_physical(s: SpectralField) -> Profile:
    """Exact inverse of :func:`to_spectral` (real part)."""
    grid = s.grid
    values = np.fft.ifft(s.coeffs * grid.phase) * grid.n_points
    return Profile(grid, values.real)


def mollify(p: Profile, h: float) -> Profile:
    """
    Convolve with a discrete Gaussian of standard deviation h.

    The kernel is truncated at 6h and renormalized to unit discrete mass,
    so mass and nonnegativity are preserved exactly up to rounding.
    """
    if not h > 0:
        raise ValueError(f"mollifier width must be positive, got {h}")
    dx = p.grid.dx
    reach = int(np.floor(MOLLIFIER_CUTOFF * h / dx))
    reach = min(reach, p.grid.n_points // 2 - 1)
    if reach == 0:
        return p
    offsets = dx * np.arange(-reach, reach + 1)
    weights = np.exp(-0.5 * (offsets / h) ** 2)
    weights /= weights.sum()
    return Profile(p.grid, convolve1d(p.values, weights, mode='wrap'))


def mass(p: Profile) -> float:
    """Periodic trapezoid sum dx * sum(rho)."""
    return float(p.grid.dx * np.sum(p.values))


def lp_norm(p: Profile, q: Union[float, str]) -> float:
    """L^q norm by the periodic trapezoid rule; q = inf gives max |rho|."""
    q = float(q)
    if np.isnan(q) or q < 1:
        raise ValueError(f"q must be >= 1 or inf, got {q}")
    a = np.abs(p.values)
    if np.isinf(q):
        return float(a.max())
    if q == 1:
        return float(p.grid.dx * a.sum())
    peak = a.max()
    if peak == 0:
        return 0.0
    # scaled to avoid overflow for large q
    return float(peak * (p.grid.dx * np.sum((a / peak) ** q)) ** (1.0 / q))
