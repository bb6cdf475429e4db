import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, optimize

from thermoforge import steady, thermo
from thermoforge.errors import LocalizedModePresent
from thermoforge.model import Lorentzian, Ohmic, Statistics
from thermoforge.scenarios import ohmic_mode, set_dot

from conftest import one_mode


@pytest.mark.parametrize("w", [-1.0, 0.3, 1.0, 4.0, 12.0])
def test_ohmic_shift_matches_principal_value(w):
    sd = Ohmic(0.07, 5.0)
    assert steady.model_shift(sd, w) == pytest.approx(steady.model_shift_pv(sd, w), rel=1e-8, abs=1e-10)


def test_lorentzian_shift_closed_form():
    sd = Lorentzian(0.5, 3.0)
    # P int G d^2 / (e^2 + d^2) / (w - e) de = pi G d w / (w^2 + d^2)
    for w in (-2.0, 0.0, 1.5):
        assert steady.model_shift(sd, w) == pytest.approx(math.pi * sd.gamma * sd.d * w / (w * w + sd.d**2), abs=1e-12)


def ohmic_threshold_oracle(omega_c=5.0):
    """eta/eta_c where the bound state appears: omega_s - Delta(0) = 0 with Delta(0) = -eta omega_c."""
    f = lambda x: 1.0 + integrate.quad(lambda w: x / omega_c * w * math.exp(-w / omega_c) / (0 - w), 0, np.inf)[0]
    return optimize.brentq(f, 0.1, 5.0)


def test_threshold_matches_root_find():
    x = ohmic_threshold_oracle()
    assert x == pytest.approx(1.0, abs=1e-9)
    assert steady.localized_mode_exists(ohmic_mode(0.98)).status is steady.ModeStatus.NONE
    mode = steady.localized_mode_exists(ohmic_mode(1.02))
    assert mode.status is steady.ModeStatus.BOUND_STATE and mode.frequency < 0
    # the bound state solves w - omega_s - Delta(w) = 0
    sd = ohmic_mode(1.02).reservoirs[0].spectral_density
    assert mode.frequency - 1.0 - steady.model_shift(sd, mode.frequency) == pytest.approx(0.0, abs=1e-9)


def test_bound_state_blocks_steady_occupation():
    with pytest.raises(LocalizedModePresent):
        steady.steady_occupation(ohmic_mode(1.3))


def test_weak_coupling_recovers_bose_einstein():
    sys_ = one_mode(Ohmic(1e-4, 5.0), T=2.0)
    n, _ = steady.steady_occupation(sys_)
    assert n[0, 0].real == pytest.approx(thermo.bose(1.0, 2.0), rel=2e-3)


def test_fermionic_weak_coupling_is_fermi_window():
    dot = set_dot(2e-4)
    n, _ = steady.steady_occupation(dot)
    # equal couplings: average of the two lead distributions at the bare level
    for i, e in enumerate((1.0, 3.0)):
        avg = 0.5 * (thermo.fermi(e, 3.0, 5.0) + thermo.fermi(e, 0.1, 2.0))
        assert n[i, i].real == pytest.approx(avg, rel=1e-3)


@given(st.floats(0.05, 0.9), st.floats(2.0, 8.0))
def test_sum_rule_ohmic(frac, omega_c):
    s = ohmic_mode(frac, omega_c=omega_c)
    assert np.abs(steady.sum_rule(s) - 1).max() < 1e-6


@given(st.floats(0.05, 2.0), st.floats(1.0, 20.0), st.floats(-3, 3))
def test_sum_rule_lorentzian(gamma, d, eps):
    s = one_mode(Lorentzian(gamma, d), stat=Statistics.FERMIONIC, eps=eps, T=1.0)
    assert np.abs(steady.sum_rule(s) - 1).max() < 1e-6


def test_thermal_table_matches_adaptive(ohmic_weak):
    T0 = np.array([0.2, 1.0, 7.0])
    table = steady.thermal_occupation_table(ohmic_weak, T0)
    import dataclasses
    for t, nb in zip(T0, table):
        s = dataclasses.replace(ohmic_weak, reservoirs=(dataclasses.replace(ohmic_weak.reservoirs[0], temperature=t),))
        assert nb == pytest.approx(steady.steady_occupation(s, tol=1e-12)[0][0, 0].real, rel=1e-7)


def test_report_fields(lorentz_dot):
    rep = steady.steady_state_report(lorentz_dot, omega=np.linspace(-5, 5, 11))
    assert rep.weight.shape[0] == 11 and rep.sum_rule_deviation < 1e-6
    assert np.isnan(rep.T_r)
    rep = steady.steady_state_report(set_dot(0.5))
    assert rep.fit_residual < 1e-10 and rep.T_r > 0
