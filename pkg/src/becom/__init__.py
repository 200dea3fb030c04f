"""Cavity optomechanics of a driven one-dimensional condensate.

The condensate's lowest Bogoliubov side mode plays the role of a
mechanical mirror coupled to a single cavity mode; two-body collisions
shift the cavity resonance, deplete the side mode, and act on it as a
phase-sensitive (parametric) drive.  The package computes mean-field
steady states, linearized quantum fluctuations and atom-photon
entanglement, displacement power spectra with normal-mode splitting,
and the semiclassical time evolution used to cross-check the algebra.
"""

from .model import (DEFAULT_OMEGA_R_HZ, HBAR, KB, DerivedParams,
                    ParameterError, PhysicalParams, derive, mode_energy,
                    thermal_occupancy)
from .steadystate import (ConvergenceError, SteadyState, effective_coupling,
                          resonance_detuning, solve_steady_state)
from .fluctuations import (CovarianceMatrix, DriftModel, FluctuationReport,
                           NonPhysicalStateError, SingularSystemError,
                           StabilityError, build_drift, fluctuation_report,
                           is_stable, lyapunov_residual, solve_lyapunov,
                           symplectic_eigenvalues)
from .spectrum import (SingularResponseError, SpectrumPoint, SpectrumResult,
                       default_grid, effective_damping, effective_frequency,
                       force_noise_coefficients, power_spectrum,
                       susceptibility)
from .dynamics import (DivergenceError, MeanFieldDerivative, MeanFieldState,
                       Trajectory, integrate, mean_field_rhs)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_OMEGA_R_HZ", "HBAR", "KB",
    "PhysicalParams", "DerivedParams", "ParameterError",
    "derive", "mode_energy", "thermal_occupancy",
    "SteadyState", "ConvergenceError",
    "solve_steady_state", "resonance_detuning", "effective_coupling",
    "DriftModel", "CovarianceMatrix", "FluctuationReport",
    "StabilityError", "SingularSystemError", "NonPhysicalStateError",
    "build_drift", "is_stable", "solve_lyapunov", "lyapunov_residual",
    "fluctuation_report", "symplectic_eigenvalues",
    "SpectrumPoint", "SpectrumResult", "SingularResponseError",
    "effective_frequency", "effective_damping", "susceptibility",
    "force_noise_coefficients", "power_spectrum", "default_grid",
    "MeanFieldState", "MeanFieldDerivative", "Trajectory",
    "DivergenceError", "mean_field_rhs", "integrate",
    "__version__",
]
