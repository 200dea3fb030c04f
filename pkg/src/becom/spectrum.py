"""Susceptibility and displacement power spectrum of the side mode.

The cavity field dresses the side mode with a frequency-dependent
effective frequency and damping; at strong coupling and small kappa the
driven response splits into two normal-mode peaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .model import PhysicalParams, thermal_occupancy
from .steadystate import SteadyState

SINGULAR_RESPONSE_TOL = 1e-14

# peaks below this fraction of the global maximum are grid noise
PEAK_PROMINENCE_FRACTION = 1e-3

DEFAULT_GRID_POINTS = 4001


class SingularResponseError(RuntimeError):
    """Susceptibility denominator vanished (undamped resonance)."""


@dataclass(frozen=True)
class SpectrumPoint:
    """One frequency sample.

    ``omega_eff`` is the signed square root of the effective frequency
    squared: negative values flag parameter regions where the dressed
    mode frequency squared has gone negative.
    """

    omega: float
    omega_eff: float
    gamma_eff: float
    s_x: float
    chi_abs2: float


@dataclass(frozen=True)
class SpectrumResult:
    points: list[SpectrumPoint]
    peak_frequencies: list[float]
    nms_detected: bool


def _cavity_denominator(omega, dd: float, kappa: float):
    return (dd**2 + kappa**2 - omega**2) ** 2 + 4.0 * omega**2 * kappa**2


def effective_frequency(omega, state: SteadyState,
                        params: PhysicalParams):
    """Effective frequency squared of the dressed side mode.

    Omega_eff^2 = gamma^2 + omega_m^2 + Dd G^2 Om10 (Dd^2+kappa^2-w^2)
    / [(Dd^2+kappa^2-w^2)^2 + 4 w^2 kappa^2].  Accepts scalar or array
    omega.
    """
    omega = np.asarray(omega, dtype=float)
    dd, kappa = state.delta_d, params.kappa
    g, om_minus = state.coupling_g, state.omega_minus_10
    num = dd * g**2 * om_minus * (dd**2 + kappa**2 - omega**2)
    return params.gamma**2 + state.omega_m**2 \
        + num / _cavity_denominator(omega, dd, kappa)


def effective_damping(omega, state: SteadyState,
                      params: PhysicalParams):
    """Effective damping Gamma_eff = 2 gamma - 2 kappa Dd G^2 Om10 / [...]."""
    omega = np.asarray(omega, dtype=float)
    dd, kappa = state.delta_d, params.kappa
    num = 2.0 * kappa * dd * state.coupling_g**2 * state.omega_minus_10
    return 2.0 * params.gamma - num / _cavity_denominator(omega, dd, kappa)


def susceptibility(omega, state: SteadyState,
                   params: PhysicalParams):
    """Mechanical susceptibility chi(w) = Om10 / (Oeff^2 - w^2 - i w Geff).

    Raises
    ------
    SingularResponseError
        If the response denominator magnitude drops below 1e-14 at any
        requested frequency.
    """
    omega = np.asarray(omega, dtype=float)
    denom = effective_frequency(omega, state, params) - omega**2 \
        - 1j * omega * effective_damping(omega, state, params)
    if np.any(np.abs(denom) < SINGULAR_RESPONSE_TOL):
        raise SingularResponseError(
            "susceptibility denominator vanished on the requested grid")
    return state.omega_minus_10 / denom


def force_noise_coefficients(omega, state: SteadyState,
                             params: PhysicalParams):
    """Coefficients of the four noise channels driving the displacement.

    Order: optical amplitude, optical phase, side-mode force, side-mode
    displacement (coefficient 1).  Internal helper; already folded into
    :func:`power_spectrum` analytically.
    """
    omega = np.asarray(omega, dtype=float)
    dd, kappa = state.delta_d, params.kappa
    g = state.coupling_g
    cav = dd**2 + (kappa - 1j * omega) ** 2
    return (
        -g * (kappa - 1j * omega) / cav,
        g * dd / cav,
        (params.gamma - 1j * omega) / state.omega_minus_10,
        np.ones_like(omega, dtype=complex),
    )


def default_grid(state: SteadyState,
                 n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Uniform grid over [0, 2 omega_m]."""
    return np.linspace(0.0, 2.0 * state.omega_m, n_points)


def power_spectrum(grid, state: SteadyState,
                   params: PhysicalParams) -> SpectrumResult:
    """Displacement power spectrum with peak detection.

    S_x(w) = |chi|^2/(4 pi) [ 4 gamma (n_B + 1/2)(gamma^2 + w^2 +
    Om10^2)/Om10^2 + 2 kappa G^2 (Dd^2 + w^2 + kappa^2)/cavity ].
    n_B is evaluated at omega_m.  Peaks are strict local maxima with
    topographic prominence >= 1e-3 of the global maximum;
    ``nms_detected`` is true iff at least two peaks sit at omega > 0.

    The caller is responsible for supplying a converged, stable steady
    state; the grid must be strictly increasing.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be 1-d and strictly increasing")
    dd, kappa, gamma = state.delta_d, params.kappa, params.gamma
    g, om_minus = state.coupling_g, state.omega_minus_10
    n_b = thermal_occupancy(state.omega_m, params)

    chi = susceptibility(grid, state, params)
    chi2 = np.abs(chi) ** 2
    thermal = 4.0 * gamma * (n_b + 0.5) \
        * (gamma**2 + grid**2 + om_minus**2) / om_minus**2
    backaction = 2.0 * kappa * g**2 * (dd**2 + grid**2 + kappa**2) \
        / _cavity_denominator(grid, dd, kappa)
    s_x = chi2 / (4.0 * np.pi) * (thermal + backaction)

    oeff2 = effective_frequency(grid, state, params)
    omega_eff = np.sign(oeff2) * np.sqrt(np.abs(oeff2))
    gamma_eff = effective_damping(grid, state, params)

    idx, _ = find_peaks(s_x, prominence=PEAK_PROMINENCE_FRACTION * s_x.max())
    peak_frequencies = [float(grid[i]) for i in idx]
    n_positive = sum(1 for f in peak_frequencies if f > 0.0)

    points = [
        SpectrumPoint(omega=float(grid[i]), omega_eff=float(omega_eff[i]),
                      gamma_eff=float(gamma_eff[i]), s_x=float(s_x[i]),
                      chi_abs2=float(chi2[i]))
        for i in range(grid.size)
    ]
    return SpectrumResult(points=points, peak_frequencies=peak_frequencies,
                          nms_detected=n_positive >= 2)
