"""Exact thermodynamics of open quantum systems at arbitrary coupling.

Quadratic (Fano-Anderson type) systems coupled linearly to bosonic or
fermionic reservoirs are solved exactly through the Green functions u(t)
and v(t, t). From them follow the renormalized Hamiltonian, the
renormalized temperature and chemical potential, and the full
thermodynamic trajectory (energy, entropy, work, heat, free energy).

Modules
-------
model       system, reservoir and scenario types, validation, JSON
quadrature  occupation functions, memory kernels, principal values
greens      Volterra solver for u and the double convolution for v
renorm      renormalized energy, dissipation and noise coefficients
state       Fock-space, quantum-dot and Gibbs density matrices
thermo      E, S, T_r, mu_r, work/heat split, free energy, specific heat
steady      frequency-domain steady state and bound-state detection
scenarios   end-to-end pipeline and benchmark scenarios
cli         command line runner
"""

from .errors import ThermoforgeError
from .model import (
    FrequencyGrid,
    Lorentzian,
    Ohmic,
    ReservoirSpec,
    ScenarioConfig,
    Statistics,
    SystemSpec,
    TimeGrid,
    Tolerances,
    critical_eta,
    load_config,
    validate_scenario,
)
from .scenarios import simulate

__version__ = "0.1.0"

__all__ = [
    "FrequencyGrid",
    "Lorentzian",
    "Ohmic",
    "ReservoirSpec",
    "ScenarioConfig",
    "Statistics",
    "SystemSpec",
    "ThermoforgeError",
    "TimeGrid",
    "Tolerances",
    "critical_eta",
    "load_config",
    "simulate",
    "validate_scenario",
]
