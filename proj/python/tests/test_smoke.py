import math

import numpy as np
import pytest

import cve_py


def law(r):
    return 0.5 * math.log1p(25.0 / 8.0 * r * r)


def test_params_round_trip():
    p = cve_py.build_params(q_m=1e3, omega_q=0.1, omega_f=0.1)
    assert p.q_m == pytest.approx(1e3)
    assert p.gamma_m == pytest.approx(5e-4)


def test_invalid_params_raise_config_error():
    with pytest.raises(cve_py.ConfigError):
        cve_py.build_params(q_m=0.3, omega_q=0.1, omega_f=0.1)


def test_two_mode_squeezed_state():
    r = 0.5
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    v = np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
    assert cve_py.symplectic_eigenvalues(v) == pytest.approx([1.0, 1.0])
    assert cve_py.log_negativity(v, [0]).e_n == pytest.approx(2 * r)
    pt = cve_py.partial_transpose(v, [1])
    assert np.allclose(cve_py.partial_transpose(pt, [1]), v)


def test_engines_agree_and_follow_ratio():
    p = cve_py.build_params(q_m=50, omega_q=0.2, omega_f=0.2)
    wh = cve_py.solve_lambda(p)
    grid = cve_py.entanglement_grid(p)
    assert grid.converged
    assert abs(wh.e_n - grid.e_n) < 1e-3
    assert 0 < wh.e_n < 2 * law(1.0)


def test_uncoupled_has_no_entanglement():
    p = cve_py.build_params(q_m=1e3, omega_q=0.0, omega_f=0.1)
    assert cve_py.solve_lambda(p).e_n == 0.0
    with pytest.raises(cve_py.ConvergenceError):
        cve_py.survival_time(p, "wiener-hopf")


def test_survival_closed_form():
    p = cve_py.build_params(q_m=1e3, omega_q=0.0, n_th=100.0)
    p = cve_py.build_params(q_m=1e3, omega_q=0.5 * p.omega_f, omega_f=p.omega_f)
    assert cve_py.survival_time_closed_form(p).theta_s == pytest.approx(5e3 / 201)
    assert cve_py.survival_time_transcendental(p).theta_s > 0


def test_mode_filter():
    p = cve_py.build_params(q_m=1e3, omega_q=0.02, omega_f=0.02)
    m = cve_py.make_mode(p, 1.0, math.pi / 4)
    assert cve_py.mode_norm(m) == pytest.approx(1.0, abs=1e-10)
    v = cve_py.subsystem_covariance(p, m)
    assert v.shape == (4, 4)
    assert cve_py.mode_negativity(p, m) <= cve_py.solve_lambda(p).e_n + 1e-3


def test_monte_carlo_validation():
    p = cve_py.build_params(q_m=100, omega_q=0.3, omega_f=0.2)
    r = cve_py.validate(p, n_traj=2000, window=0.5, seed=3)
    assert r.passed
    assert cve_py.validate(p, n_traj=2000, window=0.5, seed=3, kernel_scale=3.0).passed is False
