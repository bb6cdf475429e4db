import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from thermoforge import thermo
from thermoforge.errors import (ClosureViolation, DegenerateSystem, NonGaussianStateRequiresFockPath, NonMonotoneTr,
                                OccupationOutOfRange)
from thermoforge.model import Statistics

B, F = Statistics.BOSONIC, Statistics.FERMIONIC


@given(st.floats(0.05, 5.0), st.floats(0.05, 50.0))
def test_bose_fit_round_trip(w, T):
    n = np.array([[thermo.bose(w, T)]])
    fit = thermo.renorm_temperature_mu(np.array([[w]]), n, B)
    assert fit.T == pytest.approx(T, rel=1e-9) and fit.mu == 0.0 and fit.residual < 1e-10


@given(st.floats(-3, 3), st.floats(0.2, 3), st.floats(0.1, 5.0), st.floats(-3, 3))
def test_fermi_fit_round_trip(e1, gap, T, mu):
    e = np.array([e1, e1 + gap])
    n = np.diag(thermo.fermi(e, T, mu))
    # 1 - lam carries a relative error eps / (1 - lam); keep the inputs well conditioned
    assume(np.all((n.diagonal() > 1e-4) & (n.diagonal() < 1 - 1e-4)))
    fit = thermo.renorm_temperature_mu(np.diag(e), n, F)
    assert fit.residual < 1e-10
    assert fit.T == pytest.approx(T, rel=1e-10) and fit.mu == pytest.approx(mu, rel=1e-10, abs=1e-10 * T)


def test_fit_errors():
    with pytest.raises(DegenerateSystem):
        thermo.renorm_temperature_mu(np.array([[1.0]]), np.array([[0.3]]), F)
    with pytest.raises(OccupationOutOfRange):
        thermo.renorm_temperature_mu(np.diag([1.0, 2.0]), np.diag([1.0, 0.2]), F)
    with pytest.raises(OccupationOutOfRange):
        thermo.renorm_temperature_mu(np.array([[1.0]]), np.array([[-0.2]]), B)


def test_three_level_fermi_fit_is_least_squares():
    e = np.diag([0.0, 1.0, 2.5])
    n = np.diag(thermo.fermi(np.diag(e), 0.7, 1.1))
    fit = thermo.renorm_temperature_mu(e, n, F)
    assert fit.T == pytest.approx(0.7, rel=1e-8) and fit.residual < 1e-10


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=4))
def test_entropy_bounds(lam):
    lam = np.array(lam)
    s = thermo.gaussian_entropy(lam, F)
    assert -1e-12 <= s <= len(lam) * math.log(2) + 1e-12


def test_entropy_needs_fock_path():
    with pytest.raises(NonGaussianStateRequiresFockPath):
        thermo.entropy(np.array([[0.5]]), B, gaussian=False)


def synthetic_path(stat, n_t=4001):
    """Gibbs states along a smooth (eps(t), T(t), mu(t)) path."""
    t = np.linspace(0, 5, n_t)
    if stat is B:
        eps = (1.0 + 0.3 * np.sin(t))[:, None]
        T = 2.0 + np.tanh(t - 2)
        mu = np.zeros_like(t)
        n = thermo.bose(eps, T[:, None])
    else:
        eps = np.stack([1.0 + 0.2 * np.cos(t), 3.0 + 0.1 * t], axis=1)
        T = 1.0 + 0.5 * np.tanh(t - 2)
        mu = 2.0 + 0.3 * np.sin(t)
        n = thermo.fermi(eps, T[:, None], mu[:, None])
    E = np.array([np.diag(e) for e in eps], dtype=complex)
    N = np.array([np.diag(x) for x in n], dtype=complex)
    return t, E, N, T, mu


@pytest.mark.parametrize("stat", [B, F])
def test_first_law_closes_on_gibbs_path(stat):
    t, E, N, T, mu = synthetic_path(stat)
    traj = thermo.thermo_trajectory(t, E, N, stat)
    assert np.allclose(traj.T, T, rtol=1e-9)
    assert abs(traj.relative_closure) < 1e-6
    assert np.abs(traj.E - (traj.W + traj.Q + traj.Wc + traj.E[0])).max() < 1e-5


def test_closure_is_second_order():
    errs = []
    for n_t in (501, 1001):
        t, E, N, T, mu = synthetic_path(F, n_t)
        errs.append(abs(thermo.thermo_trajectory(t, E, N, F).closure[-1]))
    assert 0.2 < errs[1] / errs[0] < 0.3


def test_closure_violation_raised():
    t, E, N, T, mu = synthetic_path(B, 11)
    S = thermo.gaussian_entropy(np.real(np.diagonal(N, axis1=1, axis2=2)), B)
    with pytest.raises(ClosureViolation):
        thermo.work_heat_decomposition(E, N, S, B, tol=1e-12)


def test_free_energy_identity():
    t, E, N, T, mu = synthetic_path(B)
    traj = thermo.thermo_trajectory(t, E, N, B)
    assert thermo.free_energy_identity_residual(traj) < 1e-8


def test_specific_heat_routes_on_einstein_oracle():
    w = 0.7
    T = np.geomspace(w / 10, w * 10, 1200)
    sh = thermo.specific_heat(T, thermo.bose(w, T), w)
    # three-point truncation: (x h)^2 / 6 with x = w / T <= 10, h = ln(100) / 1200
    bound = (10 * math.log(100) / 1200) ** 2 / 6
    assert sh.max_relative_disagreement < bound
    assert np.allclose(sh.C_entropy, sh.C_gibbs, rtol=bound)
    with pytest.raises(NonMonotoneTr):
        thermo.specific_heat(T[::-1], thermo.bose(w, T[::-1]), w)
