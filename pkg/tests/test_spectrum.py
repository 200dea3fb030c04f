import numpy as np
import pytest
from dataclasses import replace

from becom import (SingularResponseError, default_grid, effective_damping,
                   effective_frequency, force_noise_coefficients,
                   power_spectrum, solve_steady_state, susceptibility)

from _support import paper_params

# positive-frequency peak locations at delta_c = 28700, gamma = 0.001 kappa
NMS_CASES = [
    # (kappa, omega_sw, expected peaks)
    (72.8, 80.0, [58.105]),
    (72.8, 140.0, [120.347]),
    (24.3, 140.0, [78.66, 156.50]),
]


def _solve(**overrides):
    p = paper_params(**overrides)
    return p, solve_steady_state(p)


def test_uncoupled_limits_are_exact():
    p, st = _solve(eta=0.0)
    grid = default_grid(st)
    assert st.coupling_g == 0.0
    q = effective_frequency(grid, st, p)
    assert np.all(q == p.gamma**2 + st.omega_m**2)
    assert np.all(effective_damping(grid, st, p) == 2.0 * p.gamma)


def test_susceptibility_definition():
    p, st = _solve(kappa=72.8, gamma=0.0728, delta_c=28700.0, omega_sw=80.0)
    for w in (0.5, 37.7, 58.1, 150.0):
        chi = susceptibility(w, st, p)
        denom = effective_frequency(w, st, p) - w**2 \
            - 1j * w * effective_damping(w, st, p)
        assert chi == pytest.approx(st.omega_minus_10 / denom, rel=1e-12)


def test_susceptibility_singular_point():
    # undamped uncoupled oscillator driven exactly on resonance
    p, st = _solve(eta=0.0, gamma=0.0)
    assert st.omega_m == 4.0
    with pytest.raises(SingularResponseError):
        susceptibility(4.0, st, p)
    with pytest.raises(SingularResponseError):
        power_spectrum(np.linspace(3.0, 5.0, 11), st, p)


def test_grid_validation():
    p, st = _solve()
    with pytest.raises(ValueError):
        power_spectrum(np.ones((2, 2)), st, p)
    with pytest.raises(ValueError):
        power_spectrum(np.array([1.0]), st, p)
    with pytest.raises(ValueError):
        power_spectrum(np.array([1.0, 1.0, 2.0]), st, p)
    with pytest.raises(ValueError):
        power_spectrum(np.array([2.0, 1.0]), st, p)


def test_spectrum_points_cover_grid():
    p, st = _solve(kappa=72.8, gamma=0.0728, delta_c=28700.0, omega_sw=80.0)
    grid = default_grid(st, n_points=501)
    out = power_spectrum(grid, st, p)
    assert len(out.points) == 501
    np.testing.assert_allclose([pt.omega for pt in out.points], grid)
    sx = np.array([pt.s_x for pt in out.points])
    assert np.all(sx >= 0.0)
    assert np.all(np.isfinite(sx))


def test_thermal_peak_sits_at_mode_frequency():
    p, st = _solve(eta=0.0)
    out = power_spectrum(default_grid(st), st, p)
    assert len(out.peak_frequencies) == 1
    assert abs(out.peak_frequencies[0] - st.omega_m) < 0.05
    assert not out.nms_detected


@pytest.mark.parametrize("kappa,omega_sw,expected", NMS_CASES)
def test_normal_mode_splitting_contrast(kappa, omega_sw, expected):
    p, st = _solve(kappa=kappa, gamma=0.001 * kappa, delta_c=28700.0,
                   omega_sw=omega_sw)
    out = power_spectrum(default_grid(st), st, p)
    assert len(out.peak_frequencies) == len(expected)
    np.testing.assert_allclose(out.peak_frequencies, expected, atol=0.1)
    assert out.nms_detected == (len(expected) >= 2)


def test_spectrum_integral_grid_converged():
    p, st = _solve(kappa=24.3, gamma=0.0243, delta_c=28700.0, omega_sw=140.0)
    vals = []
    for n in (4001, 8001):
        grid = default_grid(st, n_points=n)
        sx = np.array([pt.s_x for pt in power_spectrum(grid, st, p).points])
        vals.append(np.trapz(sx, grid))
    assert abs(vals[1] - vals[0]) <= 1e-3 * abs(vals[1])


def test_effective_frequency_signed_root():
    p, st = _solve(kappa=24.3, gamma=0.0243, delta_c=28700.0, omega_sw=140.0)
    strong = replace(st, coupling_g=4.0 * st.coupling_g)
    w = 100.53
    q = effective_frequency(w, strong, p)
    assert q < 0.0  # the restoring force inverts between hybridized modes
    out = power_spectrum(np.linspace(100.0, 101.0, 5), strong, p)
    for pt in out.points:
        qq = effective_frequency(pt.omega, strong, p)
        expect = np.sign(qq) * np.sqrt(abs(qq))
        assert pt.omega_eff == pytest.approx(expect, rel=1e-12)
    assert any(pt.omega_eff < 0.0 for pt in out.points)


def test_force_noise_coefficients():
    p, st = _solve(kappa=72.8, gamma=0.0728, delta_c=28700.0, omega_sw=80.0)
    w = 37.7
    c_in, c_in_conj, c_th, c_th_conj = force_noise_coefficients(w, st, p)
    cav = st.delta_d**2 + (p.kappa - 1j * w) ** 2
    assert c_in == pytest.approx(
        -st.coupling_g * (p.kappa - 1j * w) / cav, rel=1e-12)
    assert c_in_conj == pytest.approx(st.coupling_g * st.delta_d / cav,
                                      rel=1e-12)
    assert c_th == pytest.approx((p.gamma - 1j * w) / st.omega_minus_10,
                                 rel=1e-12)
    assert c_th_conj == 1.0


def test_default_grid_shape():
    _, st = _solve()
    grid = default_grid(st)
    assert grid.shape == (4001,)
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(2.0 * st.omega_m, rel=1e-14)
