"""Memory of the initial state fades; the exact density matrix stays Gibbs-like.

Starting from vacuum, a thermal state with n = 2, or the Fock state |1>,
the mode ends in the same steady state. For the Fock start the entropy is
computed from the exact density matrix rather than the Gaussian formula.

Run: python3 demos/05_initial_state_and_fock.py
"""

import dataclasses

import numpy as np

from thermoforge import state
from thermoforge.scenarios import ohmic_config, simulate

starts = {"vacuum": ohmic_config(0.5, n0=0.0), "thermal n=2": ohmic_config(0.5, n0=2.0)}
fock = ohmic_config(0.5)
starts["Fock |1>"] = dataclasses.replace(
    fock, system=dataclasses.replace(fock.system, initial_fock=np.diag([0.0, 1.0]), initial_occupation=None))

results = {name: simulate(cfg) for name, cfg in starts.items()}
for name, res in results.items():
    print(f"{name:<12} n(inf) = {res.n_time[0, 0].real:.9f}  T_r = {res.fit_time.T:.9f}  "
          f"S(inf) = {res.trajectory.S[-1]:.6f}  status {res.status}")

res = results["Fock |1>"]
k = np.searchsorted(res.green.times, 2.0)
rho = state.fock_density_matrix(np.diag([0.0, 1.0]), res.green.u[k, 0, 0], res.occ.v[k, 0, 0].real)
print(f"\nat t = 2: trace {np.trace(rho.rho).real:.12f}, <n> = {rho.mean_number():.6f}, "
      f"min eigenvalue {np.linalg.eigvalsh(rho.rho).min():.1e}")
