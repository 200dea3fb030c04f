"""Units, physical constants, and static derived quantities.

All frequencies are expressed in units of the recoil frequency omega_R,
i.e. omega_R = 1 internally.  The only place the physical value of
omega_R enters is the conversion between temperature and thermal
occupancy, which needs ``omega_r_hz`` in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 exact values
HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23       # J / K

# rubidium recoil frequency, 2*pi * 3.57 kHz, in rad/s
DEFAULT_OMEGA_R_HZ = 2.0 * math.pi * 3570.0


class ParameterError(ValueError):
    """Raised when a parameter violates its allowed range."""


@dataclass(frozen=True)
class PhysicalParams:
    """Input parameters of the condensate-cavity system.

    Every frequency-like field is in units of omega_R.  ``omega_sw`` is
    the two-body s-wave interaction frequency and is taken as a direct
    input; the microscopic scattering length never appears separately.

    Attributes
    ----------
    n_atoms : int
        Number of condensate atoms N.
    u0 : float
        One-atom light shift U0.
    kappa : float
        Cavity amplitude decay rate.
    gamma : float
        Side-mode damping rate.
    eta : float
        Pump rate.
    delta_c : float
        Cavity-pump detuning.
    omega_sw : float
        s-wave scattering frequency.
    temperature : float
        Temperature in kelvin.
    omega_r_hz : float
        Physical recoil frequency in rad/s, used only to convert
        temperature into occupation numbers.
    n_periods : int
        Number of lattice periods l inside the cavity.
    n_ph_thermal : float
        Thermal photon occupancy of the optical bath (essentially zero
        at optical frequencies; kept for generality).
    """

    n_atoms: int = 60000
    u0: float = 0.96
    kappa: float = 363.9
    gamma: float = 0.3639
    eta: float = 80.06
    delta_c: float = 28966.0
    omega_sw: float = 0.0
    temperature: float = 1e-7
    omega_r_hz: float = DEFAULT_OMEGA_R_HZ
    n_periods: int = 456
    n_ph_thermal: float = 0.0

    def validate(self) -> None:
        """Raise :class:`ParameterError` if any field is out of range."""
        if self.n_atoms < 1:
            raise ParameterError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if not self.kappa > 0:
            raise ParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.eta < 0:
            raise ParameterError(f"eta must be >= 0, got {self.eta}")
        if self.omega_sw < 0:
            raise ParameterError(f"omega_sw must be >= 0, got {self.omega_sw}")
        if self.temperature < 0:
            raise ParameterError(
                f"temperature must be >= 0, got {self.temperature}")
        if self.n_periods < 2:
            raise ParameterError(
                f"n_periods must be >= 2, got {self.n_periods}")
        if not self.omega_r_hz > 0:
            raise ParameterError(
                f"omega_r_hz must be > 0, got {self.omega_r_hz}")
        if self.n_ph_thermal < 0:
            raise ParameterError(
                f"n_ph_thermal must be >= 0, got {self.n_ph_thermal}")


@dataclass(frozen=True)
class DerivedParams:
    """Static quantities computed once from :class:`PhysicalParams`.

    Attributes
    ----------
    delta_c_tilde : float
        Stark-shifted detuning, delta_c - N*U0/2.
    omega_10 : float
        Bare frequency of the (1,0) side mode, 4 + omega_sw.
    omega_01 : float
        Bare frequency of the (0,1) side mode, 4/l**2 + omega_sw.
    hbar_omega_r_over_kb : float
        Conversion factor hbar*omega_R/k_B in kelvin.
    """

    delta_c_tilde: float
    omega_10: float
    omega_01: float
    hbar_omega_r_over_kb: float


def derive(params: PhysicalParams) -> DerivedParams:
    """Compute the static derived quantities.

    Raises
    ------
    ParameterError
        If ``params`` violates any invariant.
    """
    params.validate()
    return DerivedParams(
        delta_c_tilde=params.delta_c - params.n_atoms * params.u0 / 2.0,
        omega_10=4.0 + params.omega_sw,
        omega_01=4.0 / params.n_periods**2 + params.omega_sw,
        hbar_omega_r_over_kb=HBAR * params.omega_r_hz / KB,
    )


def mode_energy(n: int, m: int, l: int) -> float:
    """Kinetic energy 4*(n + m/l)**2 of band index n, quasimomentum m.

    Energies are in units of the recoil energy.  Valid quasimomenta lie
    in the first zone, |m| <= l/2.
    """
    if abs(m) > l / 2:
        raise ParameterError(
            f"quasimomentum index |m|={abs(m)} outside first zone (l={l})")
    return 4.0 * (n + m / l) ** 2


def thermal_occupancy(omega_m: float, params: PhysicalParams) -> float:
    """Mean thermal excitation number of a mode at frequency omega_m.

    Bose factor 1/(exp(hbar*omega_m*omega_R/kB/T) - 1); returns 0 at
    T = 0 (zero-temperature limit is taken, not an error).
    """
    if params.temperature == 0.0:
        return 0.0
    x = HBAR * omega_m * params.omega_r_hz / (KB * params.temperature)
    if x > 700.0:
        # exp overflow region; occupancy is zero to double precision
        return 0.0
    return 1.0 / math.expm1(x)
