import numpy as np
import pytest

import frontlab as fl
from frontlab.errors import ValidationError


@pytest.fixture(scope="module")
def wave_field(harmonic_basis, unit_kernel):
    ss = fl.steady_state(harmonic_basis, unit_kernel)
    c = fl.critical_speed(ss.lambda0)
    prof = fl.solve_kpp_profile(c, ss.lambda0, L_x=40.0, n_x=801)
    wave = fl.assemble_wave(prof, ss)
    fld = fl.Field(0.0, wave.u, prof.grid, harmonic_basis.grid, None)
    return fld, prof, ss


def test_front_at_origin_for_centered_wave(wave_field):
    fld, prof, ss = wave_field
    theta = ss.V[ss.grid.center_index] / 2  # mu psi0(0) / 2: crosses where v = 1/2
    xm, xp = fl.front_position(fld, theta)
    assert abs(xp) <= fld.space_grid.spacing
    assert xm == pytest.approx(fld.space_grid.nodes[0])  # wave ~ V on the whole left


def test_zero_field_has_no_front(wave_field):
    fld, prof, ss = wave_field
    zero = fl.Field(0.0, np.zeros_like(fld.u), fld.space_grid, fld.trait_grid, None)
    assert fl.front_position(zero, 1e-3) == (None, None)


def test_translation_equivariance(wave_field):
    fld, prof, ss = wave_field
    x = prof.grid.nodes
    v_shift = np.interp(x - 3.0, x, prof.v, left=prof.v[0], right=prof.v[-1])
    shifted = fl.Field(0.0, np.outer(v_shift, ss.V), fld.space_grid, fld.trait_grid, None)
    theta = ss.V[ss.grid.center_index] / 2
    _, xp0 = fl.front_position(fld, theta)
    _, xp1 = fl.front_position(shifted, theta)
    assert xp1 - xp0 == pytest.approx(3.0, abs=fld.space_grid.spacing)


def test_front_interpolates_linear_slice():
    sg = fl.SpaceGrid(10.0, 21)
    tg = fl.TraitGrid(1.0, 3)
    u = np.zeros((21, 3))
    u[:, 1] = np.clip(1.0 - (sg.nodes + 10.0) / 10.0, 0.0, 1.0)  # 1 at -L, 0 past 0
    fld = fl.Field(0.0, u, sg, tg, None)
    xm, xp = fl.front_position(fld, 0.25)
    assert xp == pytest.approx(-2.5, abs=1e-12)


def test_theta_must_be_positive(wave_field):
    fld, *_ = wave_field
    with pytest.raises(ValidationError):
        fl.front_position(fld, 0.0)


def test_speed_regression_on_synthetic_trace():
    rng = np.random.default_rng(1234)
    t = np.linspace(0.0, 50.0, 101)
    x = 1.4 * t + rng.normal(0.0, 0.01, size=t.shape)
    trace = fl.FrontTrace(t, -x, x, theta=1e-2, spacing=0.1)
    est = fl.estimate_speed(trace, window_fraction=0.0)
    assert est.status == "ok"
    assert est.c_hat == pytest.approx(1.4, abs=0.01)
    assert est.stderr < 0.01


def test_speed_no_front_marker():
    t = np.linspace(0, 10, 30)
    nan = np.full_like(t, np.nan)
    est = fl.estimate_speed(fl.FrontTrace(t, nan, nan, 1e-2), window_fraction=0.5)
    assert est.status == "no front"
    assert np.isnan(est.c_hat)


def test_speed_warns_on_nonmonotone_trace():
    t = np.linspace(0, 20, 40)
    x = 1.0 * t
    x[25] -= 3.0  # a drop far beyond the 2*h slack
    trace = fl.FrontTrace(t, -x, x, 1e-2, spacing=0.1)
    est = fl.estimate_speed(trace, window_fraction=0.0)
    assert est.warnings


def test_invasion_error_on_steady_trajectory(small_basis, unit_kernel):
    op, basis = small_basis
    ss = fl.steady_state(basis, unit_kernel)
    sg = fl.SpaceGrid(30.0, 121)
    u0 = np.tile(ss.V, (sg.n_points, 1))
    u0[0] = u0[-1] = 0.0
    f0 = fl.Field(0.0, u0, sg, basis.grid, None)
    traj = fl.run(f0, op, unit_kernel, basis,
                  fl.RunSettings(T=5.0, dt="auto", snapshot_stride=20,
                                 check_bounds=False))
    times, errors, _ = fl.invasion_profile_error(traj, ss, 1.0)
    assert errors.max() <= 1e-3 * ss.max_V  # stays at solver drift


def test_invasion_error_rejects_supercritical_cone(small_basis, unit_kernel):
    op, basis = small_basis
    ss = fl.steady_state(basis, unit_kernel)
    sg = fl.SpaceGrid(30.0, 121)
    f0 = fl.init_field(fl.InitialData(0.01, 2.0, 1.0), sg, basis.grid)
    traj = fl.run(f0, op, unit_kernel, basis, fl.RunSettings(T=0.0))
    with pytest.raises(ValidationError):
        fl.invasion_profile_error(traj, ss, 2.0, c_star=1.4)


def test_cone_truncation_warns(small_basis, unit_kernel):
    op, basis = small_basis
    ss = fl.steady_state(basis, unit_kernel)
    sg = fl.SpaceGrid(10.0, 41)
    u0 = np.tile(ss.V, (sg.n_points, 1))
    u0[0] = u0[-1] = 0.0
    f0 = fl.Field(0.0, u0, sg, basis.grid, None)
    traj = fl.run(f0, op, unit_kernel, basis,
                  fl.RunSettings(T=20.0, dt=0.02, snapshot_stride=500,
                                 check_bounds=False))
    _, _, warnings = fl.invasion_profile_error(traj, ss, 1.0)  # ct = 20 > L - margin
    assert any(w["kind"] == "cone_truncated" for w in warnings)


def test_emptiness_region_empty_flag(small_basis, unit_kernel):
    op, basis = small_basis
    sg = fl.SpaceGrid(10.0, 41)
    f0 = fl.init_field(fl.InitialData(0.01, 2.0, 1.0), sg, basis.grid)
    traj = fl.run(f0, op, unit_kernel, basis,
                  fl.RunSettings(T=30.0, dt=0.05, snapshot_stride=100,
                                 check_bounds=False))
    times, sups, flags = fl.emptiness_beyond(traj, c=1.0)  # ct > L past t=10
    assert flags[-1] is True and sups[-1] == 0.0
    assert flags[0] is False  # at t=0 the region covers the grid


def test_envelope_forecast_accepts_exponential_decay():
    t = np.linspace(0, 40, 50)
    c_star = np.sqrt(2.0)
    c = 1.2 * c_star
    rate = 0.5 * c_star * (c - c_star)
    sups = 0.3 * np.exp(-rate * t) * (1 - 0.2 * t / 40)  # slightly faster than envelope
    out = fl.envelope_forecast(t, sups, c, c_star, v_max=0.2)
    assert out["ok"]


def test_envelope_forecast_rejects_slow_decay():
    t = np.linspace(0, 40, 50)
    c_star = np.sqrt(2.0)
    c = 1.2 * c_star
    rate = 0.5 * c_star * (c - c_star)
    sups = 0.3 * np.exp(-0.5 * rate * t)  # half the required rate
    out = fl.envelope_forecast(t, sups, c, c_star, v_max=0.2)
    assert not out["ok"]
