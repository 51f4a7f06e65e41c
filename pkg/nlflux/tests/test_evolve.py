"""
Tests for the time-stepping solvers.

Copyright (c) 2025 Exergy ∞ LLC
Licensed under the MIT License (see LICENSE).
"""

import math

import numpy as np
import pytest

from nlflux.core.diagnostics import build_report, h_half_seminorm, is_non_increasing
from nlflux.core.evolve import (
    BlowUpError,
    PhysicsParams,
    SolverConfig,
    Trajectory,
    UnsupportedConfinementError,
    dilate,
    dyson_step,
    nonlinear_flux,
    rescale_gamma_to_zero,
    run,
    stable_dt,
    step_direct,
    step_splitting,
)
from nlflux.core.grid import Grid, Profile, lp_norm, mass
from nlflux.core.initial import gaussian, positive_semicircle, semicircle, smoothed_semicircle
from nlflux.core.operators import HeatPropagator, heat_step, hilbert_spectral


def _gap(a: Profile, b: Profile) -> float:
    return float(np.max(np.abs(a.values - b.values)))


def _fitted_order(steps, errors) -> float:
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


def test_physics_params_validation():
    """Test the ranges of alpha, nu and gamma."""
    with pytest.raises(ValueError):
        PhysicsParams(alpha=2.5, nu=1.0)
    with pytest.raises(ValueError):
        PhysicsParams(alpha=1.0, nu=0.0)
    with pytest.raises(ValueError):
        PhysicsParams(alpha=1.0, nu=1.0, gamma=-1.0)


def test_solver_config_validation():
    """Test that bad steps and schemes are refused."""
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.5, t_end=0.1)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=1.0, scheme='euler')
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, t_end=1.0, record_every=0)


def test_trajectory_needs_increasing_times():
    """Test that trajectories refuse repeated times."""
    p = Profile.zeros(Grid(8, 1.0))
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], (p, p))


def test_nonlinear_flux_of_constant_vanishes():
    """Test that a constant density has no flux."""
    grid = Grid(64, 4.0)
    flux = nonlinear_flux(Profile(grid, np.full(64, 0.3)), PhysicsParams(1.0, 1.0))
    assert np.max(np.abs(flux.values)) < 1e-14


def test_nonlinear_flux_has_zero_mean():
    """Test that the flux is a derivative and carries no mass."""
    grid = Grid(128, 6.0)
    flux = nonlinear_flux(semicircle(grid), PhysicsParams(1.5, 1.0))
    assert abs(mass(flux)) < 1e-12


def test_nonlinear_flux_matches_finite_difference():
    """Test d_x(rho H rho) against a central difference of the product."""
    grid = Grid(512, 16.0)
    p = gaussian(grid, sigma=1.0)
    product = p.values * hilbert_spectral(p).values
    fd = (np.roll(product, -1) - np.roll(product, 1)) / (2 * grid.dx)
    flux = nonlinear_flux(p, PhysicsParams(2.0, 1.0))
    assert np.max(np.abs(flux.values - fd)) < 1e-3


def test_flux_rejects_confinement():
    """Test that periodic transport refuses gamma > 0."""
    grid = Grid(64, 4.0)
    with pytest.raises(UnsupportedConfinementError):
        nonlinear_flux(gaussian(grid), PhysicsParams(1.0, 1.0, gamma=0.5))


def test_direct_step_without_transport_is_heat_step():
    """Test that switching the transport off leaves the fractional heat flow."""
    grid = Grid(256, 8.0)
    params = PhysicsParams(1.5, 0.8)
    p = semicircle(grid)
    cfg = SolverConfig(dt=0.01, t_end=0.01, transport=False)
    expected = heat_step(p, 0.01, HeatPropagator(params, grid))
    assert _gap(step_direct(p, 0.01, params, cfg), expected) < 1e-12


def test_direct_step_conserves_mass():
    """Test that one step keeps the mass."""
    grid = Grid(256, 8.0)
    p = smoothed_semicircle(grid)
    q = step_direct(p, 0.01, PhysicsParams(1.0, 1.0), SolverConfig(dt=0.01, t_end=0.01))
    assert mass(q) == pytest.approx(mass(p), rel=1e-10)


def test_strong_diffusion_lowers_the_peak():
    """Test that nu = 10 lowers the sup norm in one step."""
    grid = Grid(256, 8.0)
    p = smoothed_semicircle(grid)
    q = step_direct(p, 0.01, PhysicsParams(2.0, 10.0), SolverConfig(dt=0.01, t_end=0.01))
    assert lp_norm(q, np.inf) < lp_norm(p, np.inf)


def test_direct_step_reports_blow_up():
    """Test that non-finite values raise BlowUpError with the step time."""
    grid = Grid(64, 4.0)
    cfg = SolverConfig(dt=0.5, t_end=100.0, check_stability=False)
    params = PhysicsParams(0.5, 0.01)
    with pytest.raises(BlowUpError) as info:
        run(gaussian(grid, sigma=0.5, mass=1000.0), params, cfg)
    assert info.value.time is not None


def test_direct_scheme_is_second_order():
    """Test the self-convergence order of the integrating-factor RK2 scheme."""
    grid = Grid(128, 8.0)
    params = PhysicsParams(1.5, 0.5)
    p0 = gaussian(grid, sigma=0.5)
    t_end = 0.2
    reference = run(p0, params, SolverConfig(dt=0.02 / 64, t_end=t_end)).final
    steps = [0.02, 0.01, 0.005]
    errors = [_gap(run(p0, params, SolverConfig(dt=h, t_end=t_end)).final, reference) for h in steps]
    assert 1.7 <= _fitted_order(steps, errors) <= 2.3


def test_run_with_zero_end_time_returns_initial_data():
    """Test that t_end = 0 gives a single snapshot."""
    grid = Grid(64, 4.0)
    p0 = gaussian(grid)
    traj = run(p0, PhysicsParams(1.0, 1.0), SolverConfig(dt=0.1, t_end=0.0))
    assert len(traj) == 1
    assert traj.final is p0


def test_run_records_every_k_steps_and_the_final_state():
    """Test the recording cadence of run."""
    grid = Grid(64, 4.0)
    cfg = SolverConfig(dt=0.01, t_end=0.1, record_every=3)
    traj = run(gaussian(grid), PhysicsParams(2.0, 1.0), cfg)
    assert traj.times[0] == 0.0
    assert traj.times[1] == pytest.approx(0.03)
    assert traj.times[-1] == pytest.approx(0.1)
    assert len(traj) == 5


def test_run_rejects_cfl_violation():
    """Test that the direct scheme checks the transport CFL bound."""
    grid = Grid(512, 4.0)
    p0 = semicircle(grid)
    dt = 4 * stable_dt(p0)
    with pytest.raises(ValueError):
        run(p0, PhysicsParams(1.0, 1.0), SolverConfig(dt=dt, t_end=10 * dt))


def test_run_is_bitwise_deterministic():
    """Test that two identical runs agree exactly."""
    grid = Grid(128, 8.0)
    cfg = SolverConfig(dt=0.01, t_end=0.2)
    params = PhysicsParams(1.2, 0.5)
    a = run(smoothed_semicircle(grid), params, cfg)
    b = run(smoothed_semicircle(grid), params, cfg)
    assert np.array_equal(a.values(), b.values())


def test_run_rejects_confinement_off_alpha_two():
    """Test that gamma > 0 needs alpha = 2 in the periodic solvers."""
    grid = Grid(64, 4.0)
    with pytest.raises(UnsupportedConfinementError):
        run(gaussian(grid), PhysicsParams(1.5, 1.0, gamma=1.0), SolverConfig(dt=0.01, t_end=0.1))


def test_conservation_and_monotone_norms():
    """Test mass conservation and non-increasing norms along a subcritical run."""
    grid = Grid(512, 8.0)
    params = PhysicsParams(1.5, 1.0)
    traj = run(smoothed_semicircle(grid), params, SolverConfig(dt=0.01, t_end=1.0))
    report = build_report(traj, params)
    assert np.max(np.abs(report.mass - report.mass[0])) < 1e-8
    for series in (report.l1, report.l2, report.linf, report.h_half):
        assert is_non_increasing(series, rtol=1e-6)
    assert np.all(report.min_value >= -1e-6 * report.linf)


def test_sup_norm_decreases_for_alpha_two():
    """Test the maximum principle along an alpha = 2 run."""
    grid = Grid(256, 8.0)
    traj = run(smoothed_semicircle(grid), PhysicsParams(2.0, 1.0), SolverConfig(dt=0.01, t_end=2.0))
    assert is_non_increasing([lp_norm(p, np.inf) for p in traj.profiles], rtol=1e-6)


def test_scaling_symmetry():
    """Test that evolution commutes with the dilation rho -> lam^(alpha-1) rho(lam x)."""
    lam, alpha = 2.0, 1.5
    params = PhysicsParams(alpha, 1.0)
    big = Grid(512, 8.0)
    p0 = gaussian(big, sigma=0.5)
    factor = lam ** alpha
    wide = run(p0, params, SolverConfig(dt=0.01, t_end=0.4)).final
    narrow = run(dilate(p0, lam, alpha), params, SolverConfig(dt=0.01 / factor, t_end=0.4 / factor)).final
    expected = dilate(wide, lam, alpha)
    assert narrow.grid == expected.grid
    assert _gap(narrow, expected) < 1e-8 * lp_norm(expected, np.inf)


def test_dilate_scales_mass():
    """Test that the dilation multiplies the mass by lam^(alpha - 2)."""
    p = gaussian(Grid(256, 8.0))
    for alpha in (1.0, 1.5, 2.0):
        q = dilate(p, 2.0, alpha)
        assert q.grid.half_length == 4.0
        assert mass(q) == pytest.approx(2.0 ** (alpha - 2) * mass(p))


def test_splitting_without_transport_is_heat_step():
    """Test that the splitting step reduces to G(h) without transport."""
    grid = Grid(128, 8.0)
    params = PhysicsParams(2.0, 0.5)
    p = gaussian(grid, sigma=0.5)
    cfg = SolverConfig(dt=0.05, t_end=0.05, scheme='splitting', transport=False)
    expected = heat_step(p, 0.05, HeatPropagator(params, grid))
    assert _gap(step_splitting(p, 0.05, params, cfg), expected) < 1e-12


def test_splitting_conserves_mass_and_needs_nonnegative_data():
    """Test mass conservation of the split step and its sign check."""
    grid = Grid(256, 8.0)
    params = PhysicsParams(2.0, 0.5)
    cfg = SolverConfig(dt=0.05, t_end=0.05, scheme='splitting')
    p = gaussian(grid, sigma=0.5)
    assert mass(step_splitting(p, 0.05, params, cfg)) == pytest.approx(mass(p), abs=1e-8)
    negative = p.with_values(p.values - 0.01)
    with pytest.raises(ValueError):
        step_splitting(negative, 0.05, params, cfg)


def test_splitting_is_first_order_and_strang_is_more_accurate():
    """Test the splitting error against a fine direct reference."""
    grid = Grid(256, 8.0)
    params = PhysicsParams(2.0, 0.5)
    p0 = gaussian(grid, sigma=0.5)
    t_end = 0.5
    reference = run(p0, params, SolverConfig(dt=1e-3, t_end=t_end)).final
    steps = [0.05, 0.025, 0.0125]
    errors = [
        _gap(run(p0, params, SolverConfig(dt=h, t_end=t_end, scheme='splitting')).final, reference)
        for h in steps
    ]
    assert 0.7 <= _fitted_order(steps, errors) <= 1.3
    strang = run(p0, params, SolverConfig(dt=0.05, t_end=t_end, scheme='strang')).final
    assert _gap(strang, reference) < errors[0]


def test_splitting_runs_keep_sign_and_smooth_the_seminorm():
    """Test positivity and a non-increasing H^(1/2) seminorm along split runs."""
    grid = Grid(256, 8.0)
    params = PhysicsParams(2.0, 0.5)
    p0 = gaussian(grid, sigma=0.5)
    for scheme in ('splitting', 'strang'):
        traj = run(p0, params, SolverConfig(dt=0.025, t_end=0.5, scheme=scheme))
        seminorms = [h_half_seminorm(p) for p in traj.profiles]
        assert is_non_increasing(seminorms, rtol=1e-6)
        assert seminorms[-1] < seminorms[0]
        for p in traj.profiles:
            assert p.values.min() >= -1e-6 * p.values.max()
        assert mass(traj.final) == pytest.approx(mass(p0), abs=1e-8)

def test_splitting_uses_sampled_data_unless_a_mollifier_is_set():
    """Test that the splitting run smooths the initial data only on request."""
    grid = Grid(256, 8.0)
    params = PhysicsParams(2.0, 0.5)
    p0 = gaussian(grid, sigma=0.5)
    heat = heat_step(p0, 0.05, HeatPropagator(params, grid))
    plain = run(p0, params, SolverConfig(dt=0.05, t_end=0.05, scheme='splitting', transport=False))
    assert _gap(plain.final, heat) < 1e-12
    smoothed = run(p0, params, SolverConfig(dt=0.05, t_end=0.05, scheme='splitting',
                                            transport=False, mollify_width=0.2))
    assert _gap(smoothed.final, heat) > 1e-4
    assert mass(smoothed.final) == pytest.approx(mass(p0), abs=1e-10)


def test_dyson_step_identity_and_mass():
    """Test that h = 0 is the identity and a substep keeps the mass."""
    grid = Grid(256, 8.0)
    cfg = SolverConfig(dt=0.05, t_end=0.05, scheme='splitting')
    p = gaussian(grid, sigma=0.5)
    assert dyson_step(p, 0.0, cfg) is p
    assert mass(dyson_step(p, 0.05, cfg)) == pytest.approx(mass(p), abs=1e-8)
    with pytest.raises(ValueError):
        dyson_step(p.with_values(p.values - 0.1), 0.05, cfg)


def test_dyson_substep_variants_agree():
    """Test that the characteristics substep matches the spectral one."""
    grid = Grid(2048, 16.0)
    p = positive_semicircle(grid, epsilon=0.1)
    spectral = dyson_step(p, 0.05, SolverConfig(dt=0.05, t_end=0.05, scheme='splitting'))
    exact = dyson_step(p, 0.05, SolverConfig(dt=0.05, t_end=0.05, scheme='splitting',
                                             dyson_substep='characteristics'))
    assert _gap(spectral, exact) < 1e-3


def test_rescale_gamma_to_zero_time_map():
    """Test that tau = e - 1 at gamma = 1/2 maps to t = 1 with the mass unchanged."""
    grid = Grid(1024, 16.0)
    p = gaussian(grid, sigma=1.0)
    same, t0 = rescale_gamma_to_zero(p, 0.0, 0.5)
    assert same is p and t0 == 0.0
    mapped, t = rescale_gamma_to_zero(p, math.e - 1, 0.5)
    assert abs(t - 1.0) < 1e-15
    assert mass(mapped) == pytest.approx(mass(p), abs=1e-6)


def test_confined_run_maps_times_and_keeps_mass():
    """Test that gamma > 0 at alpha = 2 runs through the rescaling."""
    grid = Grid(256, 16.0)
    params = PhysicsParams(2.0, 1.0, gamma=1.0)
    traj = run(gaussian(grid, sigma=1.0), params, SolverConfig(dt=0.01, t_end=0.5))
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(0.5, abs=1e-12)
    assert np.all(np.diff(traj.times) > 0)
    assert mass(traj.final) == pytest.approx(1.0, abs=1e-4)


def test_confined_heat_flow_matches_the_ornstein_uhlenbeck_law():
    """Test that without transport a Gaussian keeps its shape with variance s0 e^(-2gt) + (nu/g)(1 - e^(-2gt))."""
    grid = Grid(512, 16.0)
    nu, gamma, sigma0 = 1.0, 1.0, 0.5
    params = PhysicsParams(2.0, nu, gamma=gamma)
    traj = run(gaussian(grid, sigma=sigma0), params,
               SolverConfig(dt=0.01, t_end=0.5, transport=False, record_every=10))
    assert len(traj) > 2
    for t, p in zip(traj.times, traj.profiles):
        decay = math.exp(-2.0 * gamma * t)
        sigma = math.sqrt(sigma0 ** 2 * decay + nu / gamma * (1.0 - decay))
        expected = gaussian(grid, sigma=sigma)
        assert _gap(p, expected) < 1e-4 * lp_norm(expected, np.inf)
