import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracscatter import PhysicsParams, dollard_phase, group_velocity, omega_symbol, r_symbol_phase, t_factor
from fracscatter.symbols import (
    dollard_phase_grid,
    phase_quadrature_oracle,
    potential_at,
    potential_grid,
    r_phase_grid,
    threshold_time,
)


def make_params(rho=0.75, gamma=1.0, lam=1.0, epsilon=0.5):
    return PhysicsParams(rho=rho, gamma=gamma, lam=lam, epsilon=epsilon)


# ---------------------------------------------------------------------------
# dispersion symbol and group velocity

def test_omega_standard_case():
    assert omega_symbol([1.0], 1.0) == pytest.approx(0.5, rel=1e-15)


def test_omega_zero_frequency():
    for rho in (0.5, 0.6, 1.0):
        assert omega_symbol([0.0], rho) == 0.0


def test_omega_fractional_value():
    # |xi|^(2 rho) / (2 rho) at rho = 0.75, |xi| = 2
    assert omega_symbol([2.0], 0.75) == pytest.approx(2.0**1.5 / 1.5, rel=1e-14)


def test_group_velocity_identity_at_rho_one():
    np.testing.assert_allclose(group_velocity([3.0, -4.0], 1.0), [3.0, -4.0])


def test_group_velocity_unit_speed_at_rho_half():
    v = group_velocity([3.0, -4.0], 0.5)
    np.testing.assert_allclose(v, [0.6, -0.8], rtol=1e-14)


def test_group_velocity_fractional_value():
    np.testing.assert_allclose(group_velocity([4.0], 0.75), [2.0], rtol=1e-14)


def test_group_velocity_singular_origin():
    with pytest.raises(ValueError):
        group_velocity([0.0], 0.75)
    np.testing.assert_allclose(group_velocity([0.0], 1.0), [0.0])


# ---------------------------------------------------------------------------
# potential

def test_potential_indicator():
    p = make_params()
    assert potential_at([0.9], p) == 0.0
    assert potential_at([1.0], p) == pytest.approx(p.lam, rel=1e-15)


def test_potential_tail_value():
    p = make_params(gamma=1.0, lam=2.0)
    assert potential_at([4.0], p) == pytest.approx(0.5, rel=1e-15)


def test_potential_grid_matches_pointwise():
    p = make_params(gamma=0.7, lam=-1.3)
    xs = np.array([0.0, 0.5, 1.0, 2.0, 10.0])
    grid_vals = potential_grid(xs, p)
    for x, v in zip(xs, grid_vals):
        assert v == potential_at([x], p)


# ---------------------------------------------------------------------------
# modifier phase closed forms

def test_phase_zero_before_threshold():
    p = make_params(rho=0.75)
    res = dollard_phase(0.4, [1.5], p)
    assert res.threshold_time == pytest.approx(1.5 ** (1 - 2 * 0.75), rel=1e-14)
    assert dollard_phase(res.threshold_time / 2, [1.5], p).phase == 0.0


def test_phase_log_branch_value():
    p = make_params(rho=1.0, gamma=1.0)
    assert dollard_phase(2.0, [2.0], p).phase == pytest.approx(0.5 * math.log(4.0), rel=1e-12)


def test_phase_power_branch_value():
    p = make_params(rho=1.0, gamma=0.5)
    assert dollard_phase(4.0, [1.0], p).phase == pytest.approx(2.0, rel=1e-12)


def test_phase_singular_at_zero_frequency():
    with pytest.raises(ValueError):
        dollard_phase(1.0, [0.0], make_params())


def test_phase_rejects_negative_time():
    with pytest.raises(ValueError):
        dollard_phase(-1.0, [1.0], make_params())


@settings(max_examples=300, deadline=None)
@given(
    rho=st.floats(0.5, 1.0),
    gamma=st.one_of(st.floats(0.05, 1.0), st.just(1.0), st.floats(1.0, 2.5)),
    lam=st.floats(-3.0, 3.0),
    xi=st.floats(0.05, 5.0),
    t=st.floats(0.0, 1000.0),
)
def test_phase_matches_quadrature_oracle(rho, gamma, lam, xi, t):
    p = make_params(rho=rho, gamma=gamma, lam=lam)
    closed = dollard_phase(t, [xi], p).phase
    oracle = phase_quadrature_oracle(t, xi, p)
    assert abs(closed - oracle) < 1e-10 * (1.0 + abs(oracle))


def test_phase_stable_near_gamma_one():
    for gamma in (1.0 - 1e-9, 1.0, 1.0 + 1e-9):
        p = make_params(rho=0.8, gamma=gamma)
        val = dollard_phase(100.0, [2.0], p).phase
        ref = dollard_phase(100.0, [2.0], make_params(rho=0.8, gamma=1.0)).phase
        assert val == pytest.approx(ref, rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(lam=st.floats(-5, 5), t=st.floats(0, 100), xi=st.floats(0.1, 4.0))
def test_phase_linear_in_coupling(lam, t, xi):
    base = dollard_phase(t, [xi], make_params(lam=1.0)).phase
    scaled = dollard_phase(t, [xi], make_params(lam=lam)).phase
    assert scaled == pytest.approx(lam * base, rel=1e-12, abs=1e-12)


def test_phase_monotone_in_time():
    for lam in (1.0, -2.0):
        p = make_params(rho=0.7, gamma=0.8, lam=lam)
        ts = np.linspace(0.0, 50.0, 200)
        phases = np.array([dollard_phase(t, [1.2], p).phase for t in ts])
        diffs = np.sign(lam) * np.diff(phases)
        assert np.all(diffs >= -1e-14)


def test_phase_degenerate_at_rho_half():
    p = make_params(rho=0.5, gamma=0.8)
    vals = [dollard_phase(7.0, [xi], p).phase for xi in (0.1, 0.9, 3.0, 40.0)]
    assert np.ptp(vals) < 1e-12 * (1 + abs(vals[0]))


def test_phase_continuous_at_threshold():
    p = make_params(rho=0.7, gamma=0.9)
    t_thresh = dollard_phase(1.0, [1.7], p).threshold_time
    just_after = dollard_phase(t_thresh * (1 + 1e-12), [1.7], p).phase
    assert abs(just_after) < 1e-11


def test_physics_params_validation():
    with pytest.raises(Exception, match="rho"):
        PhysicsParams(rho=0.3, gamma=1.0, lam=1.0, epsilon=0.5)
    with pytest.raises(Exception, match="gamma"):
        PhysicsParams(rho=0.75, gamma=0.0, lam=1.0, epsilon=0.5)
    with pytest.raises(Exception, match="epsilon"):
        PhysicsParams(rho=0.75, gamma=1.0, lam=1.0, epsilon=-0.1)
    # coupling 0 and rho = 1/2 are legal (control and degeneracy modes)
    PhysicsParams(rho=0.5, gamma=1.0, lam=0.0, epsilon=0.5)


def test_phase_grid_zero_bin_is_zero():
    p = make_params(rho=0.75)
    out = dollard_phase_grid(100.0, np.array([0.0, 1.0]), p)
    assert out[0] == 0.0
    assert out[1] != 0.0


# ---------------------------------------------------------------------------
# T factor and R phase

def test_t_factor_lower_limit_and_domain():
    p = make_params(rho=0.75, gamma=0.8)
    t_split = p.epsilon ** (1 - 2 * p.rho)
    assert t_factor(t_split, p) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        t_factor(0.9 * t_split, p)


def test_t_factor_log_branch():
    p = PhysicsParams(rho=1.0, gamma=1.0, lam=1.0, epsilon=1.0)
    assert t_factor(math.e, p) == pytest.approx(1.0, rel=1e-14)


def test_t_factor_power_branch():
    p = PhysicsParams(rho=1.0, gamma=0.5, lam=1.0, epsilon=1.0)
    assert t_factor(4.0, p) == pytest.approx(2.0, rel=1e-14)


def test_t_factor_decade_increment_at_gamma_one():
    p = make_params(rho=0.8, gamma=1.0)
    for t in (5.0, 50.0, 500.0):
        assert t_factor(10 * t, p) - t_factor(t, p) == pytest.approx(
            math.log(10.0), rel=1e-12)


def test_t_factor_monotone():
    for gamma in (0.5, 1.0, 2.0):
        p = make_params(gamma=gamma)
        t_split = p.epsilon ** (1 - 2 * p.rho)
        ts = np.geomspace(t_split, 1e4 * t_split, 50)
        vals = [t_factor(t, p) for t in ts]
        assert np.all(np.diff(vals) > 0)


def test_r_phase_empty_interval_and_domain():
    p = make_params()
    assert r_symbol_phase([p.epsilon], p) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        r_symbol_phase([0.9 * p.epsilon], p)


def test_r_phase_log_case():
    p = PhysicsParams(rho=1.0, gamma=1.0, lam=1.0, epsilon=0.5)
    assert r_symbol_phase([1.0], p) == pytest.approx(math.log(2.0), rel=1e-12)


def test_r_phase_zero_coupling():
    p = PhysicsParams(rho=0.8, gamma=0.7, lam=0.0, epsilon=0.5)
    assert r_symbol_phase([2.0], p) == 0.0


def test_r_phase_equals_phase_at_split_time():
    p = make_params(rho=0.65, gamma=0.9, lam=-1.7)
    t_split = p.epsilon ** (1 - 2 * p.rho)
    for xi in (0.5, 1.0, 3.3):
        assert r_symbol_phase([xi], p) == pytest.approx(
            dollard_phase(t_split, [xi], p).phase, rel=1e-13, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(
    rho=st.floats(0.5, 1.0),
    gamma=st.one_of(st.floats(0.05, 2.5), st.just(1.0)),
    lam=st.floats(-3.0, 3.0),
    epsilon=st.floats(0.1, 1.0),
    xi_scale=st.floats(1.0, 8.0),
    t_scale=st.floats(1.0, 50.0),
)
def test_phase_splice_identity(rho, gamma, lam, epsilon, xi_scale, t_scale):
    """Theta(t, xi) = lam |xi|^(-gamma (2 rho - 1)) T(t) + R(xi) on the support."""
    p = PhysicsParams(rho=rho, gamma=gamma, lam=lam, epsilon=epsilon)
    xi = epsilon * xi_scale
    t = (epsilon ** (1 - 2 * rho)) * t_scale
    lhs = dollard_phase(t, [xi], p).phase
    rhs = lam * xi ** (-gamma * (2 * rho - 1)) * t_factor(t, p) + r_symbol_phase([xi], p)
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))


def test_threshold_time_values():
    assert threshold_time(2.0, 1.0) == pytest.approx(0.5, rel=1e-14)
    assert threshold_time(2.0, 0.5) == pytest.approx(1.0, rel=1e-14)


def test_r_phase_grid_matches_scalar():
    p = make_params(rho=0.7, gamma=0.6, lam=2.2)
    xis = np.array([0.5, 0.8, 1.7])
    np.testing.assert_allclose(
        r_phase_grid(xis, p),
        [r_symbol_phase([x], p) for x in xis],
        rtol=1e-13,
    )
