"""Memory kernels and the level shift of an Ohmic bath.

The reservoir enters only through J(w). Its Fourier transform g(tau) is the
memory kernel of the Dyson equation; the thermal kernel gt(tau) weights J by
the Bose occupation. The principal-value shift Delta(w) tells where the
dressed level sits, and whether a bound state splits off below the band.

Run: python3 demos/01_kernels_and_level_shift.py
"""

import numpy as np

from thermoforge import quadrature, steady
from thermoforge.model import Ohmic, ReservoirSpec, Statistics
from thermoforge.scenarios import ohmic_mode

omega_c = 5.0
sd = Ohmic(0.5 / omega_c, omega_c)  # eta = 0.5 eta_c
res = ReservoirSpec(Statistics.BOSONIC, 10.0, sd)

tau = np.array([0.0, 0.1, 0.5, 1.0, 2.0])
g_a, gt_a = quadrature.reservoir_kernels(res, tau)
g_q, gt_q = quadrature.reservoir_kernels(res, tau, method="quadrature")
print("tau      |g| closed form   |g| quadrature   |gt| closed form  |gt| quadrature")
for row in zip(tau, abs(g_a), abs(g_q), abs(gt_a), abs(gt_q)):
    print("%-8.2f %-17.10f %-16.10f %-17.10f %.10f" % row)

# The Ohmic shift has a closed form in terms of exp(x) Ei(x); the adaptive
# principal value is the independent check.
print("\nw        Delta closed form   Delta principal value")
for w in (-1.0, 0.5, 1.0, 3.0, 10.0):
    print("%-8.2f %-19.12f %.12f" % (w, steady.model_shift(sd, w), steady.model_shift_pv(sd, w)))

# Below the band edge, w - omega_s - Delta(w) has a root only once
# eta exceeds eta_c = omega_s / omega_c.
print("\neta/eta_c  localized mode")
for frac in (0.9, 0.99, 1.01, 1.2, 1.5):
    mode = steady.localized_mode_exists(ohmic_mode(frac))
    print(f"{frac:<10g} {mode.status.value:<12} {mode.frequency if mode.frequency is not None else ''}")
