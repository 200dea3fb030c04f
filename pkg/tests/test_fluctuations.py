import numpy as np
import pytest
from scipy.linalg import solve_continuous_lyapunov

from becom import (CovarianceMatrix, NonPhysicalStateError, StabilityError,
                   build_drift, fluctuation_report, is_stable,
                   lyapunov_residual, solve_lyapunov, solve_steady_state,
                   symplectic_eigenvalues, thermal_occupancy)

from _support import draw_stable_ensemble, lyapunov_time_integral, paper_params

# stationary observables at delta_c = 28900, omega_sw = 1, T = 0.1 uK,
# frozen against an independently cross-checked Lyapunov solve
FROZEN_DN_PH = 1.30893164e-2
FROZEN_DN_B = 2.32431930
FROZEN_E_N = 3.39340637e-3

UNSTABLE = {"eta": 160.0, "delta_c": 28966.0}


def _cov(a_block, b_block, c_block):
    v = np.block([[a_block, c_block], [c_block.T, b_block]])
    return CovarianceMatrix(v=v, a_block=a_block, b_block=b_block,
                            c_block=c_block)


def _solve(**overrides):
    p = paper_params(**overrides)
    return p, solve_steady_state(p)


def test_drift_matrix_entries():
    p, st = _solve(delta_c=28900.0, omega_sw=1.0)
    m = build_drift(st, p)
    k, g = p.kappa, p.gamma
    dd, cg = st.delta_d, st.coupling_g
    expected = np.array([
        [-k, -dd, 0.0, 0.0, 0.0, 0.0],
        [dd, -k, -cg, 0.0, 0.0, 0.0],
        [0.0, 0.0, -g, st.omega_minus_10, 0.0, 0.0],
        [-cg, 0.0, -st.omega_plus_10, -g, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -g, st.omega_minus_01],
        [0.0, 0.0, 0.0, 0.0, -st.omega_plus_01, -g],
    ])
    np.testing.assert_array_equal(m.a_full, expected)
    np.testing.assert_array_equal(m.a_upper, m.a_full[:4, :4])


def test_diffusion_entries():
    p, st = _solve(delta_c=28900.0, omega_sw=1.0)
    m = build_drift(st, p)
    n_b = thermal_occupancy(st.omega_m, p)
    np.testing.assert_array_equal(
        m.d_upper,
        np.diag([p.kappa, p.kappa,
                 p.gamma * (2.0 * n_b + 1.0), p.gamma * (2.0 * n_b + 1.0)]))


def test_diffusion_with_photon_bath():
    p, st = _solve(n_ph_thermal=0.25)
    m = build_drift(st, p)
    assert m.d_upper[0, 0] == p.kappa * 1.5
    assert m.d_upper[1, 1] == p.kappa * 1.5


def test_unpumped_drift_decouples():
    p, st = _solve(eta=0.0)
    m = build_drift(st, p)
    assert st.coupling_g == 0.0
    np.testing.assert_array_equal(
        m.a_upper[:2, :2], [[-p.kappa, -st.delta_d], [st.delta_d, -p.kappa]])
    assert np.all(m.a_upper[:2, 2:] == 0.0)
    assert np.all(m.a_upper[2:, :2] == 0.0)
    # bare recoil side mode
    assert st.omega_plus_10 == 4.0
    assert st.omega_minus_10 == 4.0


def test_stability_classification():
    p, st = _solve(delta_c=28900.0, omega_sw=1.0)
    m = build_drift(st, p)
    assert is_stable(m)
    assert m.stable
    p, st = _solve(**UNSTABLE)
    m = build_drift(st, p)
    assert not is_stable(m)
    with pytest.raises(StabilityError):
        solve_lyapunov(m)


def test_lyapunov_solution_and_residual():
    p, st = _solve(delta_c=28900.0, omega_sw=1.0)
    m = build_drift(st, p)
    cov = solve_lyapunov(m)
    assert lyapunov_residual(m, cov) <= 1e-10 * m.d_upper.max()
    np.testing.assert_allclose(cov.v, cov.v.T, atol=1e-15)
    np.testing.assert_array_equal(cov.a_block, cov.v[:2, :2])
    np.testing.assert_array_equal(cov.b_block, cov.v[2:, 2:])
    np.testing.assert_array_equal(cov.c_block, cov.v[:2, 2:])
    # independent direct solver on the same equation A V + V A^T = -D
    ref = solve_continuous_lyapunov(m.a_upper, -m.d_upper)
    np.testing.assert_allclose(cov.v, ref, rtol=1e-10, atol=1e-13)


def test_lyapunov_matches_time_integral():
    p, st = _solve(delta_c=28900.0, omega_sw=1.0)
    m = build_drift(st, p)
    cov = solve_lyapunov(m)
    ref = lyapunov_time_integral(m.a_upper, m.d_upper)
    np.testing.assert_allclose(cov.v, ref, rtol=1e-7, atol=1e-9)


def test_ensemble_residuals():
    for _, _, m in draw_stable_ensemble(seed=7, n=5):
        cov = solve_lyapunov(m)
        assert lyapunov_residual(m, cov) <= 1e-10 * m.d_upper.max()
        lo, hi = symplectic_eigenvalues(cov)
        assert lo >= 0.5 - 1e-9
        assert hi >= lo


def test_symplectic_vacuum():
    cov = _cov(np.eye(2) / 2, np.eye(2) / 2, np.zeros((2, 2)))
    np.testing.assert_allclose(symplectic_eigenvalues(cov), [0.5, 0.5],
                               atol=1e-14)


def test_report_vacuum():
    cov = _cov(np.eye(2) / 2, np.eye(2) / 2, np.zeros((2, 2)))
    rep = fluctuation_report(cov)
    assert rep.delta_n_ph == 0.0
    assert rep.delta_n_b == 0.0
    assert rep.log_negativity == 0.0
    assert rep.stable


def test_report_two_mode_squeezed():
    # standard two-mode squeezed form: E_N = 2r
    r = 0.5
    ch, sh = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    cov = _cov(ch * np.eye(2), ch * np.eye(2), np.diag([sh, -sh]))
    rep = fluctuation_report(cov)
    assert rep.log_negativity == pytest.approx(2 * r, rel=1e-12)
    assert rep.delta_n_ph == pytest.approx((np.cosh(2 * r) - 1) / 2, rel=1e-12)


def test_report_analytic_entangled_value():
    cov = _cov(np.eye(2) / 2, np.eye(2) / 2, np.diag([0.4, -0.4]))
    rep = fluctuation_report(cov)
    # eta_minus^2 = (0.82 - 0.8)/2 = 0.01
    assert rep.log_negativity == pytest.approx(np.log(5.0), rel=1e-12)


def test_report_rejects_complex_branch():
    cov = _cov(np.eye(2) / 2, 0.6 * np.eye(2), np.diag([0.55, 0.55]))
    with pytest.raises(NonPhysicalStateError):
        fluctuation_report(cov)


def test_report_rejects_zero_eigenvalue():
    cov = _cov(np.eye(2) / 2, np.eye(2) / 2, np.diag([0.5, -0.5]))
    with pytest.raises(NonPhysicalStateError):
        fluctuation_report(cov)


def test_report_frozen_paper_point():
    p, st = _solve(delta_c=28900.0, omega_sw=1.0)
    rep = fluctuation_report(solve_lyapunov(build_drift(st, p)))
    assert rep.delta_n_ph == pytest.approx(FROZEN_DN_PH, rel=1e-6)
    assert rep.delta_n_b == pytest.approx(FROZEN_DN_B, rel=1e-6)
    assert rep.log_negativity == pytest.approx(FROZEN_E_N, rel=1e-6)


def test_unpumped_state_is_separable():
    # with no coupling the stationary state is a product state; the
    # partial-transpose root sits exactly on the separability border, up
    # to cancellation dust in sqrt(Sigma^2 - 4 det V)
    for ws in (1.0, 25.0):
        p, st = _solve(eta=0.0, omega_sw=ws)
        rep = fluctuation_report(solve_lyapunov(build_drift(st, p)))
        assert 0.0 <= rep.log_negativity <= 2e-15
    p, st = _solve(eta=0.0, omega_sw=0.0)
    rep = fluctuation_report(solve_lyapunov(build_drift(st, p)))
    assert rep.log_negativity == 0.0


def test_stable_flag_passthrough():
    cov = _cov(np.eye(2) / 2, np.eye(2) / 2, np.zeros((2, 2)))
    assert fluctuation_report(cov, stable=False).stable is False
