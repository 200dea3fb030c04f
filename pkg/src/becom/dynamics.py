"""Semiclassical mean-field dynamics, used as an independent oracle.

Integrates the noise-free c-number equations of motion for the cavity
amplitude a and the side-mode amplitudes c10, c01 (c10 is kept unscaled,
of order sqrt(N); the steady-state module's beta_1 corresponds to
c10/sqrt(N)).  The side-mode driving term +i (sqrt(2N)/4) U0 |a|^2 is
oriented so that the stationary point of these equations is the branch
returned by ``solve_steady_state`` (real, positive beta_1).

A fixed-step RK4 scheme with step h = min(1e-3/kappa, 1e-3/omega_10~)
handles the kappa/gamma stiffness ratio; the compiled kernel advances
millions of steps per second, which settling at paper-scale damping
(gamma ~ 0.4) requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import PhysicalParams, derive

SETTLE_TOL = 1e-8
DIVERGENCE_LIMIT = 1e12
STEP_FACTOR = 1e-3
MAX_STEPS = 2_000_000_000

# Reassociation and contraction only: the kernel's divergence check must
# see honest NaN/inf comparisons, which the nnan/ninf fast-math flags
# would optimize away.
_FASTMATH = {"contract", "reassoc", "nsz", "arcp"}

_RAN_TO_END, _SETTLED_EARLY, _DIVERGED = 0, 1, 2


class DivergenceError(RuntimeError):
    """A trajectory magnitude exceeded the divergence limit.

    Carries the last recorded state in ``state``.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class MeanFieldState:
    a: complex
    c10: complex
    c01: complex
    t: float = 0.0


@dataclass(frozen=True)
class MeanFieldDerivative:
    da: complex
    dc10: complex
    dc01: complex


@dataclass(eq=False)
class Trajectory:
    """Sampled mean-field trajectory.

    ``settled`` reports whether all derivative magnitudes at the final
    state are below 1e-8; ``step`` is the fixed RK4 step actually used.
    """

    t: np.ndarray
    a: np.ndarray
    c10: np.ndarray
    c01: np.ndarray
    final_state: MeanFieldState
    settled: bool
    step: float


def mean_field_rhs(state: MeanFieldState,
                   params: PhysicalParams) -> MeanFieldDerivative:
    """Time derivatives of (a, c10, c01).

    The cavity equation couples to the side modes only through the real
    bracket sqrt(2N) Re(c10) + |c10|^2 + |c01|^2, so the side modes
    shift the cavity phase but never its decay rate.
    """
    d = derive(params)
    rad = math.sqrt(2.0 * params.n_atoms)
    a, c10, c01 = state.a, state.c10, state.c01
    bracket = rad * c10.real + abs(c10) ** 2 + abs(c01) ** 2
    da = (1j * d.delta_c_tilde - params.kappa) * a \
        - 0.5j * params.u0 * bracket * a - params.eta
    a2 = abs(a) ** 2
    om10t = d.omega_10 + 0.5 * params.u0 * a2
    om01t = d.omega_01 + 0.5 * params.u0 * a2
    half_sw = 0.5 * params.omega_sw
    dc10 = -(params.gamma + 1j * om10t) * c10 \
        + 0.25j * rad * params.u0 * a2 - 1j * half_sw * c10.conjugate()
    dc01 = -(params.gamma + 1j * om01t) * c01 \
        - 1j * half_sw * c01.conjugate()
    return MeanFieldDerivative(da=da, dc10=dc10, dc01=dc01)


@njit(inline="always", fastmath=_FASTMATH)
def _deriv(ar, ai, cr, ci, dr, di,
           kappa, gamma, eta, dct, half_u0, rad, om10, om01, half_sw):
    bracket = rad * cr + cr * cr + ci * ci + dr * dr + di * di
    w = dct - half_u0 * bracket
    dar = -kappa * ar - w * ai - eta
    dai = -kappa * ai + w * ar
    a2 = ar * ar + ai * ai
    m10 = om10 + half_u0 * a2
    m01 = om01 + half_u0 * a2
    s = 0.5 * rad * half_u0 * a2
    dcr = -gamma * cr + (m10 - half_sw) * ci
    dci = -gamma * ci - (m10 + half_sw) * cr + s
    ddr = -gamma * dr + (m01 - half_sw) * di
    ddi = -gamma * di - (m01 + half_sw) * dr
    return dar, dai, dcr, dci, ddr, ddi


@njit(cache=True, fastmath=_FASTMATH)
def _rk4_kernel(state, kappa, gamma, eta, dct, half_u0, rad, om10, om01,
                half_sw, h, n_steps, check_every, stride,
                ts, ar_s, ai_s, cr_s, ci_s, dr_s, di_s,
                stop_when_settled):
    ar, ai, cr, ci, dr, di = (state[0], state[1], state[2], state[3],
                              state[4], state[5])
    n_rec = 0
    steps = 0
    for i in range(n_steps):
        if i % stride == 0:
            ts[n_rec] = i * h
            ar_s[n_rec] = ar
            ai_s[n_rec] = ai
            cr_s[n_rec] = cr
            ci_s[n_rec] = ci
            dr_s[n_rec] = dr
            di_s[n_rec] = di
            n_rec += 1
        k1 = _deriv(ar, ai, cr, ci, dr, di, kappa, gamma, eta, dct,
                    half_u0, rad, om10, om01, half_sw)
        k2 = _deriv(ar + 0.5 * h * k1[0], ai + 0.5 * h * k1[1],
                    cr + 0.5 * h * k1[2], ci + 0.5 * h * k1[3],
                    dr + 0.5 * h * k1[4], di + 0.5 * h * k1[5],
                    kappa, gamma, eta, dct, half_u0, rad, om10, om01,
                    half_sw)
        k3 = _deriv(ar + 0.5 * h * k2[0], ai + 0.5 * h * k2[1],
                    cr + 0.5 * h * k2[2], ci + 0.5 * h * k2[3],
                    dr + 0.5 * h * k2[4], di + 0.5 * h * k2[5],
                    kappa, gamma, eta, dct, half_u0, rad, om10, om01,
                    half_sw)
        k4 = _deriv(ar + h * k3[0], ai + h * k3[1],
                    cr + h * k3[2], ci + h * k3[3],
                    dr + h * k3[4], di + h * k3[5],
                    kappa, gamma, eta, dct, half_u0, rad, om10, om01,
                    half_sw)
        sixth = h / 6.0
        ar += sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
        ai += sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        cr += sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
        ci += sixth * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3])
        dr += sixth * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4])
        di += sixth * (k1[5] + 2.0 * (k2[5] + k3[5]) + k4[5])
        steps = i + 1
        if (i + 1) % check_every == 0 or i + 1 == n_steps:
            mag = max(ar * ar + ai * ai, cr * cr + ci * ci,
                      dr * dr + di * di)
            if not mag <= DIVERGENCE_LIMIT * DIVERGENCE_LIMIT:
                # covers overflow and NaN contamination
                state[0], state[1], state[2] = ar, ai, cr
                state[3], state[4], state[5] = ci, dr, di
                return _DIVERGED, steps, n_rec
            if stop_when_settled:
                g1 = _deriv(ar, ai, cr, ci, dr, di, kappa, gamma, eta,
                            dct, half_u0, rad, om10, om01, half_sw)
                dmax = max(g1[0] * g1[0] + g1[1] * g1[1],
                           g1[2] * g1[2] + g1[3] * g1[3],
                           g1[4] * g1[4] + g1[5] * g1[5])
                if dmax < SETTLE_TOL * SETTLE_TOL:
                    state[0], state[1], state[2] = ar, ai, cr
                    state[3], state[4], state[5] = ci, dr, di
                    ts[n_rec] = steps * h
                    ar_s[n_rec] = ar
                    ai_s[n_rec] = ai
                    cr_s[n_rec] = cr
                    ci_s[n_rec] = ci
                    dr_s[n_rec] = dr
                    di_s[n_rec] = di
                    return _SETTLED_EARLY, steps, n_rec + 1
    state[0], state[1], state[2] = ar, ai, cr
    state[3], state[4], state[5] = ci, dr, di
    ts[n_rec] = steps * h
    ar_s[n_rec] = ar
    ai_s[n_rec] = ai
    cr_s[n_rec] = cr
    ci_s[n_rec] = ci
    dr_s[n_rec] = dr
    di_s[n_rec] = di
    return _RAN_TO_END, steps, n_rec + 1


def integrate(initial: MeanFieldState, t_end: float,
              params: PhysicalParams, sample_points: int = 1024,
              stop_when_settled: bool = False) -> Trajectory:
    """Integrate the mean-field equations with fixed-step RK4.

    Parameters
    ----------
    initial : MeanFieldState
    t_end : float
        Integration span (> 0); the actual span is rounded to a whole
        number of steps.
    sample_points : int
        Approximate number of trajectory samples returned.
    stop_when_settled : bool
        Return early once all derivative magnitudes fall below 1e-8.

    Raises
    ------
    DivergenceError
        If any amplitude magnitude exceeds 1e12.
    """
    params.validate()
    if not t_end > 0.0:
        raise ValueError(f"t_end must be > 0, got {t_end}")
    d = derive(params)
    om10t0 = d.omega_10 + 0.5 * params.u0 * abs(initial.a) ** 2
    h = STEP_FACTOR / max(params.kappa, abs(om10t0))
    n_steps = max(1, int(round(t_end / h)))
    if n_steps > MAX_STEPS:
        raise ValueError(
            f"t_end = {t_end:g} needs {n_steps:.3g} steps at h = {h:.3g}; "
            "reduce the span or start nearer equilibrium")
    stride = max(1, n_steps // max(1, sample_points - 1))
    n_max = n_steps // stride + 2

    state = np.array([initial.a.real, initial.a.imag,
                      initial.c10.real, initial.c10.imag,
                      initial.c01.real, initial.c01.imag])
    buf = [np.empty(n_max) for _ in range(7)]
    code, steps, n_rec = _rk4_kernel(
        state, params.kappa, params.gamma, params.eta, d.delta_c_tilde,
        0.5 * params.u0, math.sqrt(2.0 * params.n_atoms), d.omega_10,
        d.omega_01, 0.5 * params.omega_sw, h, n_steps, 2000, stride,
        *buf, stop_when_settled)

    final = MeanFieldState(a=complex(state[0], state[1]),
                           c10=complex(state[2], state[3]),
                           c01=complex(state[4], state[5]),
                           t=initial.t + steps * h)
    if code == _DIVERGED:
        raise DivergenceError(
            f"trajectory diverged at t = {final.t:.6g}", state=final)
    g = mean_field_rhs(final, params)
    settled = max(abs(g.da), abs(g.dc10), abs(g.dc01)) < SETTLE_TOL
    return Trajectory(
        t=initial.t + buf[0][:n_rec].copy(),
        a=buf[1][:n_rec] + 1j * buf[2][:n_rec],
        c10=buf[3][:n_rec] + 1j * buf[4][:n_rec],
        c01=buf[5][:n_rec] + 1j * buf[6][:n_rec],
        final_state=final, settled=settled, step=h)
