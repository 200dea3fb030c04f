"""Mean-field steady state of the coupled cavity/side-mode system.

Solves the self-consistent pair

    alpha = eta / sqrt(delta_d**2 + kappa**2)
    beta1 = (sqrt(2)/4) * U0 * alpha**2 / sqrt(Omega10p**2 + gamma**2)

where the effective detuning delta_d = delta_c_tilde - (N*U0/2) *
beta1*(beta1 + sqrt(2)) and Omega10p = omega_10 + U0*alpha**2/2 +
omega_sw/2 both depend on the unknowns.  The solver follows the branch
continuously connected to the unpumped solution (alpha = beta1 = 0)
unless an initial guess is supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .model import PhysicalParams, derive

SQRT2 = math.sqrt(2.0)

DEFAULT_TOL = 1e-12
DEFAULT_RELAX = 0.5
MAX_ITERATIONS = 100000

# bisection bracket for the resonance search, in units of N*U0/2
RESONANCE_BRACKET_FACTOR = 1.05
RESONANCE_TOL = 1e-6


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed to converge.

    Carries the last iterate (``state``) and its residual so callers can
    report partial progress instead of silently truncating.
    """

    def __init__(self, message, state=None, residual=None):
        super().__init__(message)
        self.state = state
        self.residual = residual


@dataclass(frozen=True)
class SteadyState:
    """Converged mean-field amplitudes and the frequencies they fix.

    ``alpha`` and ``beta_1`` are real and non-negative (the phase
    convention under which the steady-state equations are derived);
    ``beta_0`` is identically zero.  ``beta_1`` is the side-mode
    amplitude per sqrt(N).
    """

    alpha: float
    beta_1: float
    beta_0: float
    delta_d: float
    omega_10_tilde: float
    omega_01_tilde: float
    omega_plus_10: float
    omega_minus_10: float
    omega_plus_01: float
    omega_minus_01: float
    omega_m: float
    coupling_g: float
    converged: bool
    iterations: int
    residual: float


def _assemble(params: PhysicalParams, alpha: float, beta1: float,
              converged: bool, iterations: int, residual: float) -> SteadyState:
    d = derive(params)
    shift = 0.5 * params.u0 * alpha**2
    om10t = d.omega_10 + shift
    om01t = d.omega_01 + shift
    half_sw = 0.5 * params.omega_sw
    op10, om10 = om10t + half_sw, om10t - half_sw
    delta_d = d.delta_c_tilde \
        - 0.5 * params.n_atoms * params.u0 * beta1 * (beta1 + SQRT2)
    return SteadyState(
        alpha=alpha,
        beta_1=beta1,
        beta_0=0.0,
        delta_d=delta_d,
        omega_10_tilde=om10t,
        omega_01_tilde=om01t,
        omega_plus_10=op10,
        omega_minus_10=om10,
        omega_plus_01=om01t + half_sw,
        omega_minus_01=om01t - half_sw,
        omega_m=math.sqrt(op10 * om10),
        coupling_g=params.u0 * math.sqrt(params.n_atoms) * alpha
        * (beta1 + SQRT2 / 2.0),
        converged=converged,
        iterations=iterations,
        residual=residual,
    )


def solve_steady_state(params: PhysicalParams,
                       initial_guess: tuple[float, float] | None = None,
                       relax: float = DEFAULT_RELAX,
                       tol: float = DEFAULT_TOL) -> SteadyState:
    """Damped fixed-point solve for (alpha, beta_1).

    Parameters
    ----------
    params : PhysicalParams
    initial_guess : (alpha, beta1), optional
        Starting point for branch exploration.  Default (0, 0) follows
        the branch connected to the unpumped cavity.
    relax : float
        Under-relaxation factor applied to each update.
    tol : float
        Convergence threshold on max(|d alpha|, |d beta1|) of the
        undamped update.

    Raises
    ------
    ConvergenceError
        After the iteration cap; the exception carries the last iterate.
    """
    d = derive(params)
    n_u0_half = 0.5 * params.n_atoms * params.u0
    alpha, beta1 = initial_guess if initial_guess is not None else (0.0, 0.0)
    residual = math.inf
    for it in range(1, MAX_ITERATIONS + 1):
        delta_d = d.delta_c_tilde - n_u0_half * beta1 * (beta1 + SQRT2)
        alpha_new = params.eta / math.hypot(delta_d, params.kappa)
        op10 = d.omega_10 + 0.5 * params.u0 * alpha_new**2 \
            + 0.5 * params.omega_sw
        beta1_new = (SQRT2 / 4.0) * params.u0 * alpha_new**2 \
            / math.hypot(op10, params.gamma)
        da, db = alpha_new - alpha, beta1_new - beta1
        residual = max(abs(da), abs(db))
        alpha += relax * da
        beta1 += relax * db
        if residual < tol:
            return _assemble(params, alpha, beta1, True, it, residual)
    state = _assemble(params, alpha, beta1, False, MAX_ITERATIONS, residual)
    raise ConvergenceError(
        f"steady state not converged after {MAX_ITERATIONS} iterations "
        f"(residual {residual:.3e})", state=state, residual=residual)


def resonance_detuning(params: PhysicalParams) -> float:
    """Cavity detuning at which the effective detuning delta_d vanishes.

    Equals (N*U0/2)*(1 + sqrt(2)*beta1 + beta1**2) evaluated
    self-consistently.  Found by bisection on delta_d(delta_c) over the
    bracket [N*U0/2, 1.05*N*U0/2]; the bracket width at return is below
    1e-6, so |delta_d| at the returned detuning is of the same order.
    """
    params.validate()
    base = 0.5 * params.n_atoms * params.u0

    def delta_d_at(dc: float) -> float:
        return solve_steady_state(replace(params, delta_c=dc)).delta_d

    lo, hi = base, base * RESONANCE_BRACKET_FACTOR
    f_lo = delta_d_at(lo)
    if f_lo == 0.0:
        # unpumped cavity: beta1 = 0 exactly, resonance at N*U0/2
        return lo
    f_hi = delta_d_at(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise ConvergenceError(
            f"resonance bracket [{lo}, {hi}] does not straddle delta_d = 0 "
            f"(endpoints {f_lo:.3e}, {f_hi:.3e})")
    while hi - lo > RESONANCE_TOL:
        mid = 0.5 * (lo + hi)
        if delta_d_at(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def effective_coupling(state: SteadyState, params: PhysicalParams) -> float:
    """Effective atom-photon coupling G = U0*sqrt(N)*alpha*(beta1 + sqrt(2)/2)."""
    return params.u0 * math.sqrt(params.n_atoms) * state.alpha \
        * (state.beta_1 + SQRT2 / 2.0)
