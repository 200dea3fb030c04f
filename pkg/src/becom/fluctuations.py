"""Linearized fluctuations: drift/diffusion matrices, stability,
stationary covariance, occupations, and entanglement.

Quadrature convention X = (a + a*)/sqrt(2), P = (a - a*)/(i sqrt(2)),
vacuum variance 1/2.  The covariance matrix solves the Lyapunov
equation A V + V A^T = -D, vectorized into a dense 16x16 linear system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PhysicalParams, thermal_occupancy
from .steadystate import SteadyState

# eigenvalues with real part above this are treated as unstable;
# rejects marginal (purely imaginary) spectra
STABILITY_THRESHOLD = -1e-12

# slack on Sigma**2 - 4 det V before the state is declared unphysical
PT_DISCRIMINANT_TOL = 1e-9


class StabilityError(RuntimeError):
    """Operation requires a stable drift matrix."""


class SingularSystemError(RuntimeError):
    """The vectorized Lyapunov system is numerically singular."""


class NonPhysicalStateError(RuntimeError):
    """Covariance matrix fails the Gaussian physicality condition."""


@dataclass(eq=False)
class DriftModel:
    """Drift and diffusion of the linearized quadrature dynamics.

    ``a_full`` is the 6x6 drift over [dX_a, dP_a, dX_10, dP_10, dX_01,
    dP_01]; the (0,1) side mode occupies the trailing 2x2 block and is
    decoupled from the optical mode.  ``a_upper`` is the leading 4x4
    block actually used for stationary observables, and ``d_upper`` the
    matching diffusion diag[kappa(2n_ph+1), kappa(2n_ph+1),
    gamma(2n_B+1), gamma(2n_B+1)].
    """

    a_full: np.ndarray
    a_upper: np.ndarray
    d_upper: np.ndarray
    stable: bool


@dataclass(eq=False)
class CovarianceMatrix:
    """Stationary 4x4 covariance with its 2x2 blocks.

    v = [[a_block, c_block], [c_block^T, b_block]]; a_block is the
    optical mode, b_block the side mode.
    """

    v: np.ndarray
    a_block: np.ndarray
    b_block: np.ndarray
    c_block: np.ndarray


@dataclass(frozen=True)
class FluctuationReport:
    delta_n_ph: float
    delta_n_b: float
    log_negativity: float
    stable: bool


def _max_real_eigenvalue(a: np.ndarray) -> float:
    return float(np.linalg.eigvals(a).real.max())


def build_drift(state: SteadyState, params: PhysicalParams) -> DriftModel:
    """Assemble the 6x6 drift matrix and 4x4 diffusion matrix.

    n_B is evaluated at the renormalized mode frequency omega_m.
    """
    kappa, gamma = params.kappa, params.gamma
    dd, g = state.delta_d, state.coupling_g
    a = np.zeros((6, 6))
    a[0, 0] = -kappa
    a[0, 1] = -dd
    a[1, 0] = dd
    a[1, 1] = -kappa
    a[1, 2] = -g
    a[2, 2] = -gamma
    a[2, 3] = state.omega_minus_10
    a[3, 0] = -g
    a[3, 2] = -state.omega_plus_10
    a[3, 3] = -gamma
    a[4, 4] = -gamma
    a[4, 5] = state.omega_minus_01
    a[5, 4] = -state.omega_plus_01
    a[5, 5] = -gamma
    a_upper = a[:4, :4].copy()
    n_b = thermal_occupancy(state.omega_m, params)
    d_opt = kappa * (2.0 * params.n_ph_thermal + 1.0)
    d_at = gamma * (2.0 * n_b + 1.0)
    d_upper = np.diag([d_opt, d_opt, d_at, d_at])
    stable = _max_real_eigenvalue(a_upper) < STABILITY_THRESHOLD
    return DriftModel(a_full=a, a_upper=a_upper, d_upper=d_upper,
                      stable=stable)


def is_stable(model: DriftModel) -> bool:
    """True iff every eigenvalue of the upper drift block has Re < 0."""
    return _max_real_eigenvalue(model.a_upper) < STABILITY_THRESHOLD


def solve_lyapunov(model: DriftModel) -> CovarianceMatrix:
    """Stationary covariance from A V + V A^T = -D.

    Solved exactly by vectorization: (kron(A, I) + kron(I, A)) vec(V) =
    -vec(D) with row-major vec, then symmetrized.

    Raises
    ------
    StabilityError
        If the drift is not stable (no stationary state exists).
    SingularSystemError
        If the 16x16 system is numerically singular.
    """
    if not is_stable(model):
        raise StabilityError(
            "drift matrix is not stable; no stationary covariance")
    a = model.a_upper
    eye = np.eye(4)
    m = np.kron(a, eye) + np.kron(eye, a)
    try:
        v = np.linalg.solve(m, -model.d_upper.reshape(16)).reshape(4, 4)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Lyapunov solve failed: {exc}") from exc
    v = 0.5 * (v + v.T)
    return CovarianceMatrix(v=v, a_block=v[:2, :2], b_block=v[2:, 2:],
                            c_block=v[:2, 2:])


def lyapunov_residual(model: DriftModel, cov: CovarianceMatrix) -> float:
    """Max-norm residual of A V + V A^T + D (0 for the exact solution)."""
    a, v = model.a_upper, cov.v
    return float(np.abs(a @ v + v @ a.T + model.d_upper).max())


def symplectic_eigenvalues(cov: CovarianceMatrix) -> tuple[float, float]:
    """The two symplectic eigenvalues of the 4x4 covariance.

    Physical Gaussian states have both >= 1/2 in this convention.
    """
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    omega = np.block([[j, np.zeros((2, 2))], [np.zeros((2, 2)), j]])
    ev = np.sort(np.abs(np.linalg.eigvals(omega @ cov.v)))
    # eigenvalues come in +-i nu pairs
    return float(ev[0]), float(ev[2])


def fluctuation_report(cov: CovarianceMatrix,
                       stable: bool = True) -> FluctuationReport:
    """Occupations and entanglement of the stationary Gaussian state.

    delta_n_ph = (V11 + V22 - 1)/2, delta_n_b = (V33 + V44 - 1)/2, and
    the logarithmic negativity E_N = max(0, -ln 2 eta_minus) where
    eta_minus is the smaller symplectic eigenvalue of the partial
    transpose.

    Raises
    ------
    NonPhysicalStateError
        If Sigma**2 < 4 det V beyond numerical tolerance (the partial
        transpose eigenvalue would be complex).
    """
    v = cov.v
    delta_n_ph = 0.5 * (v[0, 0] + v[1, 1] - 1.0)
    delta_n_b = 0.5 * (v[2, 2] + v[3, 3] - 1.0)
    det_a = float(np.linalg.det(cov.a_block))
    det_b = float(np.linalg.det(cov.b_block))
    det_c = float(np.linalg.det(cov.c_block))
    det_v = float(np.linalg.det(v))
    sigma = det_a + det_b - 2.0 * det_c
    disc = sigma**2 - 4.0 * det_v
    if disc < -PT_DISCRIMINANT_TOL * max(sigma**2, 1.0):
        raise NonPhysicalStateError(
            f"partial-transpose discriminant negative beyond tolerance "
            f"(Sigma^2 = {sigma**2:.6e}, 4 det V = {4*det_v:.6e})")
    eta_minus_sq = 0.5 * (sigma - np.sqrt(max(disc, 0.0)))
    if eta_minus_sq <= 0.0:
        raise NonPhysicalStateError(
            f"partial-transpose symplectic eigenvalue collapsed to zero "
            f"(Sigma = {sigma:.6e}, det V = {det_v:.6e})")
    log_neg = max(0.0, -0.5 * np.log(4.0 * eta_minus_sq))
    return FluctuationReport(delta_n_ph=float(delta_n_ph),
                             delta_n_b=float(delta_n_b),
                             log_negativity=float(log_neg),
                             stable=stable)
