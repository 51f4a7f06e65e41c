"""
Initial data menu.

Profiles with kinks (semicircle, indicator) are sampled as exact cell
averages so their grid mass is exact; smooth profiles are point samples.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import csv
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import numpy as np

from .grid import Grid, Profile, mollify

logger = logging.getLogger(__name__)


def _cell_average(grid: Grid, antiderivative: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    x = np.asarray(grid.nodes)
    half = 0.5 * grid.dx
    return (antiderivative(x + half) - antiderivative(x - half)) / grid.dx


def semicircle(grid: Grid, radius: float = 2.0, mass: float = 1.0) -> Profile:
    """Wigner semicircle (2M / (pi R^2)) sqrt(R^2 - x^2), cell averaged."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    r2 = radius * radius

    def antiderivative(x):
        s = np.clip(x, -radius, radius)
        return (s * np.sqrt(r2 - s * s) + r2 * np.arcsin(s / radius)) / (np.pi * r2)

    return Profile(grid, mass * _cell_average(grid, antiderivative))


def smoothed_semicircle(grid: Grid, width: float = 0.1, radius: float = 2.0) -> Profile:
    """Semicircle mollified by a Gaussian of the given width; nonnegative, unit mass."""
    return mollify(semicircle(grid, radius), width)


def positive_semicircle(grid: Grid, epsilon: float = 0.1, radius: float = 2.0) -> Profile:
    """
    Semicircle convolved with the Poisson kernel P_epsilon.

    Closed form -Im G(x + i eps) / pi with G the Cauchy transform of the
    semicircle; strictly positive with 1/x^2 tails.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    z = np.asarray(grid.nodes) + 1j * epsilon
    # product of principal roots selects the branch ~ z at infinity
    root = np.sqrt(z - radius) * np.sqrt(z + radius)
    g = 2.0 * (z - root) / radius ** 2
    return Profile(grid, -g.imag / np.pi)


def gaussian(grid: Grid, sigma: float = 1.0, mass: float = 1.0, center: float = 0.0) -> Profile:
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.asarray(grid.nodes) - center
    return Profile(grid, mass * np.exp(-0.5 * (x / sigma) ** 2) / (np.sqrt(2 * np.pi) * sigma))


def cauchy(grid: Grid, epsilon: float = 1.0, mass: float = 1.0, center: float = 0.0) -> Profile:
    """Cauchy density M eps / (pi ((x - c)^2 + eps^2)), i.e. M P_eps(x - c)."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    x = np.asarray(grid.nodes) - center
    return Profile(grid, mass * epsilon / (np.pi * (x * x + epsilon * epsilon)))


def indicator(grid: Grid, a: float = 0.0, b: float = 1.0, height: float = 1.0) -> Profile:
    if b <= a:
        raise ValueError(f"empty interval [{a}, {b}]")

    def antiderivative(x):
        return height * (np.clip(x, a, b) - a)

    return Profile(grid, _cell_average(grid, antiderivative))


def shifted(base: Profile, offset: float, width: float = 1.0) -> Profile:
    """base + offset * exp(-x^2 / (2 width^2)); a negative offset lowers the minimum."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    x = np.asarray(base.grid.nodes)
    return base.with_values(base.values + offset * np.exp(-0.5 * (x / width) ** 2))


def critical_power(grid: Grid, alpha: float, amplitude: float = 0.1, epsilon: float = 0.05,
                   taper: Optional[float] = None) -> Profile:
    """
    Regularized homogeneous profile A (eps^2 + x^2)^(-(alpha - 1) / 2).

    Scale invariant under the equation's dilation away from |x| ~ eps; its
    sup norm decays at the critical rate t^(-1 + 1/alpha) while the kernel
    width stays below ``taper``, the width of an optional Gaussian cutoff.
    """
    if not 1 < alpha <= 2:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    x = np.asarray(grid.nodes)
    values = amplitude * (epsilon ** 2 + x * x) ** (-0.5 * (alpha - 1))
    if taper is not None:
        if taper <= 0:
            raise ValueError(f"taper must be positive, got {taper}")
        values = values * np.exp(-0.5 * (x / taper) ** 2)
    return Profile(grid, values)


def from_file(grid: Grid, path: str) -> Profile:
    """
    Load samples from a text file.

    Accepts one value per line, or a CSV with a ``rho`` column and an
    optional ``x`` column.  With ``x`` the samples are linearly
    interpolated onto the grid (zero outside); without it the row count
    must equal the grid size.
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"initial data file not found: {path}")
    with open(file_path, 'r', encoding='utf-8', newline='') as f:
        first = f.readline()
        f.seek(0)
        if 'rho' in first:
            rows = list(csv.DictReader(f))
            rho = np.array([float(r['rho']) for r in rows])
            xs = np.array([float(r['x']) for r in rows]) if rows and 'x' in rows[0] else None
        else:
            rho = np.array([float(line) for line in f if line.strip()])
            xs = None
    if xs is not None:
        order = np.argsort(xs)
        values = np.interp(grid.nodes, xs[order], rho[order], left=0.0, right=0.0)
        return Profile(grid, values)
    if rho.size != grid.n_points:
        raise ValueError(
            f"{path}: {rho.size} samples for a grid of {grid.n_points} nodes and no x column"
        )
    return Profile(grid, rho)


def build_initial(grid: Grid, entry: Dict[str, Any], alpha: float = 2.0) -> Profile:
    """Construct a profile from a configuration mapping with a ``kind`` key."""
    params = {k: v for k, v in entry.items() if k != 'kind'}
    kind = entry.get('kind', 'semicircle')
    if kind == 'shifted':
        base = build_initial(grid, params.pop('base', {'kind': 'smoothed_semicircle'}), alpha)
        return shifted(base, **params)
    if kind == 'file':
        return from_file(grid, params['path'])
    if kind == 'critical_power':
        return critical_power(grid, alpha, **params)
    builders = {
        'semicircle': semicircle,
        'smoothed_semicircle': smoothed_semicircle,
        'positive_semicircle': positive_semicircle,
        'gaussian': gaussian,
        'cauchy': cauchy,
        'indicator': indicator,
    }
    if kind not in builders:
        raise ValueError(f"unknown initial data kind '{kind}'")
    return builders[kind](grid, **params)
