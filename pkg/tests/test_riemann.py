"""Riemann middle states, wave classification, shock speeds, and fans."""
import numpy as np
import pytest

from pulsetube import (ConfigurationError, FanParams, VacuumFormation,
                       build_fan, classify, entropy_pair, rh_residual,
                       shock_speed_S, solve_middle, to_invariants,
                       validate_fan_params, wave_speeds)


def test_shock_speed_pins(gp14):
    # precomputed with 50-digit arithmetic
    assert shock_speed_S(np.array([2.0]), np.array([0.5]), gp14)[0] == \
        pytest.approx(2.0748318026693101188, rel=1e-14)
    assert shock_speed_S(np.array([0.5]), np.array([2.0]), gp14)[0] == \
        pytest.approx(0.51870795066732752969, rel=1e-14)


def test_shock_speed_equal_density_limit(gp14):
    # S(rho, rho) -> rho**theta (sound speed), not 0/0
    assert shock_speed_S(np.array([1.3]), np.array([1.3]), gp14)[0] == \
        pytest.approx(1.0538739520617834188, rel=1e-14)


def test_shock_speed_rejects_vacuum_reference(gp14):
    with pytest.raises(ValueError):
        shock_speed_S(np.array([1.0]), np.array([0.0]), gp14)


# middle states precomputed with 50-digit wave-curve arithmetic
MIDDLE_PINS = [
    # (uL, uR, rho_m, m_m, case)
    ((1.0, 0.3), (0.6, -0.2), 1.0701549736393375413,
     0.24797190037587971621, "S1S2"),
    ((0.4, -0.5), (1.5, 0.8), 0.28904916255783042711,
     -0.28561807466144273355, "R1R2"),
    ((1.0, 0.8), (1.0, -0.8), 2.0565404323886275637, 0.0, "S1S2"),
    ((0.5, 0.2), (1.4, 0.9), 0.75527425778625051383,
     0.016512841673720554909, "S1R2"),
]


@pytest.mark.parametrize("u_l,u_r,rho_m,m_m,case", MIDDLE_PINS)
def test_middle_state_pins(u_l, u_r, rho_m, m_m, case, gp14):
    # pins carry more digits than the solver's 1e-12 stopping rule delivers,
    # so the comparison tolerance is a notch looser than the oracle's
    (r, m), got = solve_middle(*u_l, *u_r, gp14)
    assert r == pytest.approx(rho_m, rel=1e-11)
    assert m == pytest.approx(m_m, rel=1e-9, abs=1e-11)
    assert got == case
    assert classify(*u_l, *u_r, gp14) == case


def test_flat_data_is_double_rarefaction(gp14):
    (r, m), case = solve_middle(0.7, 0.21, 0.7, 0.21, gp14)
    assert case == "R1R2"          # zero-strength waves count as rarefactions
    assert r == pytest.approx(0.7, rel=1e-12)
    assert m == pytest.approx(0.21, rel=1e-12)


def test_vacuum_formation(gp14):
    # w_L = -4 + 0.1**0.2/0.2 = -0.845 <= z_R = +0.845: the fans separate
    with pytest.raises(VacuumFormation):
        solve_middle(0.1, -0.4, 0.1, 0.4, gp14)
    with pytest.raises(ValueError):
        solve_middle(0.0, 0.0, 1.0, 0.0, gp14)


def test_colliding_streams_pinned(gp14):
    sigma1, sigma2, (rho_m, m_m), case = wave_speeds(1.0, 0.8, 1.0, -0.8, gp14)
    assert case == "S1S2"
    assert sigma1 == pytest.approx(-0.75718824900184773572, rel=1e-11)
    assert sigma2 == pytest.approx(+0.75718824900184773572, rel=1e-11)
    assert rho_m == pytest.approx(2.0565404323886275637, rel=1e-11)
    assert abs(m_m) < 1e-11


def test_rh_residual_vanishes_at_shock_speed(gp14):
    sigma1, sigma2, (rho_m, m_m), _ = wave_speeds(1.0, 0.8, 1.0, -0.8, gp14)
    res1 = rh_residual(sigma1, 1.0, 0.8, rho_m, m_m, gp14)
    res2 = rh_residual(sigma2, rho_m, m_m, 1.0, -0.8, gp14)
    np.testing.assert_allclose(res1, 0.0, atol=1e-11)
    np.testing.assert_allclose(res2, 0.0, atol=1e-11)
    # a wrong speed leaves a visible residual
    assert np.max(np.abs(rh_residual(0.0, 1.0, 0.8, rho_m, m_m, gp14))) > 0.1


def test_shock_dissipates_entropy_pinned(gp14):
    # sigma [eta] - [q] across the 1-shock of the colliding pair,
    # precomputed with 50-digit arithmetic
    sigma1, _, (rho_m, m_m), _ = wave_speeds(1.0, 0.8, 1.0, -0.8, gp14)
    eta_l, q_l = entropy_pair(1.0, 0.8, gp14)
    eta_m, q_m = entropy_pair(rho_m, m_m, gp14)
    d = sigma1 * (eta_m - eta_l) - (q_m - q_l)
    assert d == pytest.approx(0.14013095242466656117, rel=1e-10)
    assert d >= 0.0


def test_random_middle_states_close_the_curves(gp14):
    rng = np.random.default_rng(99)
    for _ in range(200):
        rho_l, rho_r = rng.uniform(0.2, 3.0, 2)
        v_l, v_r = rng.uniform(-0.8, 0.8, 2)
        (rho_m, m_m), case = solve_middle(rho_l, rho_l * v_l,
                                          rho_r, rho_r * v_r, gp14)
        assert rho_m > 0
        assert set(case) <= set("RS12")


class TestFan:
    def test_staircase_structure(self, gp14):
        fp = FanParams()
        dx = 0.02
        h = dx ** fp.alpha_fan
        fan = build_fan(1.0, 0.0, -4.0, dx, fp, gp14)     # z_l = -5
        assert fan.p == int(np.floor(1.0 / h)) + 1
        assert fan.states.shape == (fan.p, 2)
        assert fan.speeds.shape == (fan.p - 1,)
        zs, ws = fan.states[:, 0], fan.states[:, 1]
        assert zs[0] == pytest.approx(-5.0)
        assert zs[-1] == -4.0
        np.testing.assert_allclose(np.diff(zs)[:-1], h, rtol=1e-13)
        # the closing step absorbs the remainder without shrinking below h
        assert h <= zs[-1] - zs[-2] < 2 * h
        np.testing.assert_allclose(ws, ws[0])

    def test_edge_speeds_increase(self, gp14):
        fan = build_fan(1.4, -0.3, -2.0, 0.01, FanParams(), gp14)
        assert np.all(np.diff(fan.speeds) > 0)

    def test_degenerate_fan_is_the_left_wave_speed(self, gp14):
        z_l, _ = to_invariants(0.9, 0.18, gp14)
        fan = build_fan(0.9, 0.18, float(z_l), 0.02, FanParams(), gp14)
        assert fan.p == 2
        lam1 = 0.2 - 0.9 ** 0.2
        assert fan.speeds[0] == pytest.approx(lam1, rel=1e-13)

    def test_orientation_guard(self, gp14):
        with pytest.raises(ValueError, match="orientation"):
            build_fan(1.0, 0.0, -6.0, 0.02, FanParams(), gp14)


class TestFanParams:
    def test_defaults_admissible(self, gp14, gp53):
        validate_fan_params(FanParams(), gp14)
        validate_fan_params(FanParams(), gp53)

    @pytest.mark.parametrize("alpha,beta", [
        (0.4, 0.1),      # alpha too small
        (1.1, 0.1),      # alpha too large
        (0.75, 0.0),     # beta must be positive
        (0.75, 0.31),    # beta >= 2/(gamma+5)
        (0.6, 0.25),     # alpha >= 1 - 2 beta
    ])
    def test_bad_params(self, alpha, beta, gp14):
        with pytest.raises(ConfigurationError):
            validate_fan_params(FanParams(alpha_fan=alpha, beta_fan=beta), gp14)
