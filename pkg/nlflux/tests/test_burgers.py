"""
Tests for exact solutions by complex characteristics.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import math

import numpy as np
import pytest

from nlflux.core.burgers import (
    HILBERT_COUPLING,
    CharCoeffs,
    CharParams,
    HorizonError,
    complex_solution,
    forward_map,
    forward_map_hyperbolic,
    height_residual,
    horizon,
    invert_map,
    jacobian,
    longtime_density,
    longtime_limit_w,
    steady_state,
    trace_solution,
)
from nlflux.core.evolve import PhysicsParams, SolverConfig, run
from nlflux.core.grid import Grid, mass
from nlflux.core.initial import cauchy, positive_semicircle, shifted, smoothed_semicircle


@pytest.fixture(scope='module')
def data():
    """Smoothed semicircle on a moderate grid."""
    return smoothed_semicircle(Grid(512, 8.0))


def test_char_params_validation():
    """Test that mu must stay below nu and vanish with nu."""
    with pytest.raises(ValueError):
        CharParams(nu=1.0, mu=1.0)
    with pytest.raises(ValueError):
        CharParams(nu=0.0, mu=0.1)
    with pytest.raises(ValueError):
        CharParams(nu=1.0, gamma=-1.0)


def test_horizon_values():
    """Test T = ln(2 nu / mu - 1) / gamma and its limits."""
    assert horizon(CharParams(nu=1.0, gamma=1.0, mu=0.5)) == pytest.approx(math.log(3.0))
    assert horizon(CharParams(nu=1.0, gamma=1.0, mu=0.0)) == math.inf
    assert horizon(CharParams(nu=1.0, gamma=0.0, mu=0.5)) == math.inf
    assert 0 < horizon(CharParams(nu=1.0, gamma=1.0, mu=0.999)) < 0.01


def test_coefficients_are_continuous_at_the_series_switch():
    """Test that the small gamma t series agrees with the closed forms."""
    gamma = 1.0
    for t in (0.999e-6, 1.0e-6):
        c = CharCoeffs.at(t, gamma)
        assert c.b == pytest.approx(math.sinh(gamma * t) / gamma, rel=1e-10)
        assert c.d == pytest.approx(-math.expm1(-gamma * t) / gamma, rel=1e-10)
        assert c.a == math.exp(-gamma * t)
    zero = CharCoeffs.at(2.0, 0.0)
    assert (zero.a, zero.b, zero.d) == (1.0, 2.0, 2.0)


def test_inversion_without_diffusion_at_the_grid_edges():
    """Test that edge nodes invert to feet inside the data support when nu = 0."""
    grid = Grid(512, 8.0)
    p0 = positive_semicircle(grid, epsilon=0.1)
    cp = CharParams(nu=0.0)
    for x in (grid.nodes[0], grid.nodes[-1]):
        w = invert_map(complex(x, 0.0), 0.05, p0, cp)
        assert grid.nodes[0] <= w.z.real <= grid.nodes[-1]
        assert abs(forward_map(w, 0.05, p0, cp) - x) < 1e-9
    trace = trace_solution(p0, 0.05, cp)
    assert np.all(trace.rho > 0)


def test_forward_map_at_time_zero_is_identity(data):
    """Test that Z(w, 0) = w."""
    w = complex(0.4, 0.9)
    assert forward_map(w, 0.0, data, CharParams(nu=1.0)) == w


def test_forward_map_of_cauchy_data():
    """Test Z(i, 1) = -i / (2 pi) for the Poisson kernel with nu = 1, gamma = 0."""
    p0 = cauchy(Grid(16384, 64.0), epsilon=1.0)
    z = forward_map(1j, 1.0, p0, CharParams(nu=1.0))
    assert abs(z - (-1j / (2 * math.pi))) < 1e-5


def test_hyperbolic_form_agrees(data):
    """Test that both closed forms of the characteristic agree."""
    cp = CharParams(nu=1.0, gamma=1.0)
    w = complex(0.3, 0.8)
    assert abs(forward_map(w, 0.4, data, cp) - forward_map_hyperbolic(w, 0.4, data, cp)) < 1e-10


def test_small_gamma_limit(data):
    """Test that gamma -> 0 recovers the unconfined characteristic."""
    w = complex(-0.5, 0.6)
    tiny = forward_map(w, 0.7, data, CharParams(nu=1.0, gamma=1e-8))
    free = forward_map(w, 0.7, data, CharParams(nu=1.0, gamma=0.0))
    assert abs(tiny - free) < 1e-6


def test_forward_map_rejects_bad_input(data):
    """Test that feet must be interior and times below the horizon."""
    with pytest.raises(ValueError):
        forward_map(complex(0.0, 0.0), 0.1, data, CharParams(nu=1.0))
    with pytest.raises(HorizonError):
        forward_map(1j, 2.0, data, CharParams(nu=1.0, gamma=1.0, mu=0.5))


def test_inversion_for_tiny_time_is_near_identity(data):
    """Test that the preimage at t = 1e-8 is the target itself."""
    z = complex(0.2, 0.5)
    w = invert_map(z, 1e-8, data, CharParams(nu=1.0))
    assert abs(w.z - z) < 1e-6


def test_inversion_round_trip_on_the_real_axis(data):
    """Test that Z(Z^-1(x)) = x for random boundary points."""
    cp = CharParams(nu=1.0, gamma=1.0)
    rng = np.random.default_rng(21)
    for x in rng.uniform(-3.0, 3.0, 20):
        w = invert_map(complex(x, 0.0), 0.5, data, cp)
        assert w.im > 0
        assert abs(forward_map(w, 0.5, data, cp) - x) < 1e-8 * (1 + abs(x))


def test_height_residual_changes_sign_once(data):
    """Test the monotone height equation along vertical lines."""
    cp = CharParams(nu=1.0, gamma=1.0)
    c = CharCoeffs.at(0.5, cp.gamma)
    ys = np.logspace(-6, 3, 200)
    for x in np.linspace(-3.0, 3.0, 10):
        values = np.array([height_residual(x, y, 0.0, c, data, cp.nu) for y in ys])
        assert values[0] < 0 < values[-1]
        assert np.count_nonzero(np.diff(np.sign(values))) == 1


def test_jacobian_matches_finite_difference(data):
    """Test |Z_w|^2 against a central difference of the holomorphic map."""
    cp = CharParams(nu=1.0, gamma=1.0)
    w, h = complex(0.3, 0.8), 1e-5
    slope = (forward_map(w + h, 0.4, data, cp) - forward_map(w - h, 0.4, data, cp)) / (2 * h)
    assert jacobian(w, 0.4, data, cp) == pytest.approx(abs(slope) ** 2, rel=1e-6)
    assert jacobian(w, 0.4, data, cp) > 0


def test_trace_for_small_time_is_close_to_data():
    """Test that rho(., 1e-3) stays near rho0."""
    p0 = smoothed_semicircle(Grid(256, 8.0))
    sol = trace_solution(p0, 1e-3, CharParams(nu=1.0))
    assert np.max(np.abs(sol.rho - p0.values)) < 5e-3
    assert all(w.im > 0 for w in sol.preimages)


def test_trace_conserves_mass_with_tails():
    """Test that grid mass plus tails stays one."""
    p0 = smoothed_semicircle(Grid(1024, 16.0))
    cp = CharParams(nu=1.0, gamma=1.0)
    for t in (0.2, 0.5, 1.0):
        sol = trace_solution(p0, t, cp)
        assert sol.total_mass == pytest.approx(1.0, abs=2e-4)
        assert sol.tail_mass > 0


def test_trace_respects_the_lower_bound():
    """Test that rho >= -mu exp(gamma t) for data bounded below by -mu."""
    grid = Grid(512, 8.0)
    p0 = shifted(smoothed_semicircle(grid), -0.5, width=0.2)
    mu = 0.2
    assert p0.values.min() >= -mu
    cp = CharParams(nu=1.0, gamma=1.0, mu=mu)
    sol = trace_solution(p0, 0.5, cp)
    assert sol.rho.min() >= -mu * math.exp(0.5) - 1e-9


def test_lower_bound_case_near_the_horizon():
    """Test inversion up to 0.9 T and the height residual floor b mu - nu d closing at T."""
    grid = Grid(512, 8.0)
    p0 = shifted(smoothed_semicircle(grid), -1.0, width=0.3)
    mu = -float(p0.values.min())
    x0 = float(grid.nodes[int(np.argmin(p0.values))])
    cp = CharParams(nu=1.0, gamma=1.0, mu=mu)
    T = horizon(cp)
    assert 0 < T < 1
    floors = []
    for fraction in (0.5, 0.9, 0.99):
        c = CharCoeffs.at(fraction * T, cp.gamma)
        floor = height_residual(x0, 1e-10, 0.0, c, p0, cp.nu)
        assert floor == pytest.approx(c.b * mu - cp.nu * c.d, abs=1e-6)
        floors.append(floor)
    assert floors[0] < floors[1] < floors[2] < 0
    assert abs(floors[2]) < 0.1 * abs(floors[0])
    t = 0.9 * T
    for x in (x0, x0 + 0.25, 1.5):
        w = invert_map(complex(x, 0.0), t, p0, cp)
        assert abs(forward_map(w, t, p0, cp) - x) < 1e-8 * (1 + abs(x))
    sol = trace_solution(p0, t, cp)
    assert sol.rho.min() >= -mu * math.exp(cp.gamma * t) - 1e-9


def test_trace_matches_spectral_solver():
    """Test the exact alpha = 1 solution against the direct scheme."""
    grid = Grid(1024, 16.0)
    p0 = smoothed_semicircle(grid)
    direct = run(p0, PhysicsParams(1.0, 1.0), SolverConfig(dt=0.005, t_end=0.5)).final
    exact = trace_solution(p0, 0.5, CharParams(nu=1.0)).profile()
    assert np.max(np.abs(direct.values - exact.values)) < 2e-3


def test_complex_solution_matches_trace(data):
    """Test that f = u - i rho on the axis agrees with the trace."""
    cp = CharParams(nu=1.0, gamma=0.5)
    sol = trace_solution(data, 0.3, cp)
    j = 256
    f = complex_solution(complex(data.grid.nodes[j], 0.0), 0.3, data, cp)
    assert f.real == pytest.approx(sol.u[j], abs=1e-8)
    assert -f.imag == pytest.approx(sol.rho[j], abs=1e-8)


def test_steady_state_closed_forms():
    """Test the stationary density at the origin, its symmetry and the inviscid limit."""
    assert steady_state(0.0, 1.0, 1.0) == pytest.approx((math.sqrt(3.0) - 1.0) / math.pi, abs=1e-12)
    x = np.linspace(-3.0, 3.0, 61)
    values = steady_state(x, 0.7, 1.3)
    assert np.allclose(values, values[::-1])
    inviscid = steady_state(x, 0.0, 1.0)
    expected = np.sqrt(np.maximum(2.0 - x * x, 0.0)) / math.pi
    assert np.max(np.abs(inviscid - expected)) < 1e-12
    with pytest.raises(ValueError):
        steady_state(0.0, 1.0, 0.0)


def test_longtime_density_is_the_steady_state():
    """Test that the long-time limit of the characteristics gives the stationary density."""
    x = np.linspace(-3.0, 3.0, 13)
    limit = longtime_density(x, 1.0, 1.0)
    steady = steady_state(x, 1.0, 1.0, coupling=HILBERT_COUPLING)
    assert np.max(np.abs(limit - steady)) < 1e-10
    for z in (0.0, 1.5, -2.0 + 0.3j):
        assert longtime_limit_w(z, 1.0, 1.0).imag > 0


def test_rescaled_preimages_approach_their_limit(data):
    """Test that exp(-gamma t) Z^-1(z, t) converges to the long-time root."""
    cp = CharParams(nu=1.0, gamma=1.0)
    target = longtime_limit_w(0.5, 1.0, 1.0, mass=mass(data))
    gaps = [abs(math.exp(-t) * invert_map(0.5, t, data, cp).z - target) for t in (2.0, 4.0, 8.0)]
    assert gaps[1] <= 0.5 * gaps[0]
    assert gaps[2] <= 0.5 * gaps[1]
    assert gaps[2] < 1e-2


def test_trace_relaxes_to_the_steady_state():
    """Test that the confined exact solution is near equilibrium by t = 12."""
    p0 = smoothed_semicircle(Grid(128, 4.0))
    sol = trace_solution(p0, 12.0, CharParams(nu=1.0, gamma=1.0))
    x = np.asarray(p0.grid.nodes)
    inside = np.abs(x) <= 3.0
    steady = steady_state(x[inside], 1.0, 1.0, coupling=HILBERT_COUPLING, mass=mass(p0))
    assert np.max(np.abs(sol.rho[inside] - steady)) < 1e-2
