import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import linalg, special

from thermoforge import state, thermo
from thermoforge.errors import EigenvalueOutOfRange, InvalidInitialState, TruncationTooSmall
from thermoforge.model import Statistics


def coherent(alpha, n):
    k = np.arange(n + 1)
    return np.exp(-abs(alpha) ** 2 / 2 + k * np.log(alpha + 0j) - 0.5 * special.gammaln(k + 1)) if alpha else (k == 0) * 1.0


def annihilator(n):
    return np.diag(np.sqrt(np.arange(1, n + 1)), 1)


def random_rho(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_coherent_state_stays_coherent():
    alpha, u = 1.3, 0.6 * np.exp(-0.7j)
    out = state.fock_density_matrix(coherent(alpha, 40), u, 0.0, n_max=40)
    ref = coherent(u * alpha, 40)
    assert np.abs(out.rho - np.outer(ref, ref.conj())).max() < 1e-10


def test_thermal_state_stays_thermal():
    n0, u, v = 2.0, 0.5 + 0.2j, 0.8
    p0 = np.array([n0**k / (1 + n0) ** (k + 1) for k in range(120)])
    out = state.fock_density_matrix(np.diag(p0 / p0.sum()), u, v, n_max=200)
    nt = abs(u) ** 2 * n0 + v
    ref = np.array([nt**k / (1 + nt) ** (k + 1) for k in range(201)])
    assert np.abs(np.diag(out.rho).real - ref).max() < 1e-9
    assert np.abs(out.rho - np.diag(np.diag(out.rho))).max() < 1e-14


@given(st.integers(0, 2**31), st.integers(1, 4), st.floats(0, 1), st.floats(-math.pi, math.pi), st.floats(0, 3))
def test_fock_solution_invariants(seed, dim, r, phase, v):
    rng = np.random.default_rng(seed)
    rho0 = random_rho(rng, dim)
    u = r * np.exp(1j * phase)
    out = state.fock_density_matrix(rho0, u, v)
    rho = out.rho
    assert abs(np.trace(rho) - 1) < 1e-9
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-10
    n0 = np.real(np.arange(dim) @ np.diag(rho0))
    assert out.mean_number() == pytest.approx(r * r * n0 + v, abs=1e-8)
    a0, a = annihilator(dim - 1), annihilator(out.n_max)
    assert np.trace(a @ rho) == pytest.approx(u * np.trace(a0 @ rho0), abs=1e-8)


def test_invalid_initial_states():
    with pytest.raises(InvalidInitialState):
        state.fock_density_matrix(np.diag([0.5, 0.4]), 0.5, 0.1)
    with pytest.raises(InvalidInitialState):
        state.fock_density_matrix(np.array([[0.5, 0.5], [0.0, 0.5]]), 0.5, 0.1)


def test_truncation_too_small():
    with pytest.raises(TruncationTooSmall):
        state.fock_density_matrix([1.0], 0.5, 5.0, n_max=10)


def test_default_n_max_tail():
    for v in (0.01, 1.0, 30.0):
        n = state.default_n_max(0, v)
        assert (v / (1 + v)) ** (n + 1) < 1e-12 or v == 0


def test_fermion_operators_anticommute():
    ops = state.fermion_operators(3)
    eye = np.eye(8)
    for i, a in enumerate(ops):
        for j, b in enumerate(ops):
            assert np.allclose(a @ b + b @ a, 0)
            assert np.allclose(a @ b.T + b.T @ a, eye * (i == j))


def test_dot_density_matrix():
    v = np.array([[0.6, 0.1 + 0.05j], [0.1 - 0.05j, 0.3]])
    rho = state.dot_density_matrix(v).rho
    assert abs(np.trace(rho) - 1) < 1e-14 and np.linalg.eigvalsh(rho).min() > -1e-14
    assert rho[3, 3].real == pytest.approx(np.linalg.det(v).real)
    assert state.dot_density_matrix(v).coherence == pytest.approx(v[0, 1])


def herm_occupation(rng, d, hi):
    W = linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
    lam = rng.uniform(0, hi, d)
    return W @ np.diag(lam) @ W.conj().T, lam


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_fermionic_gibbs_round_trip(seed, d):
    rng = np.random.default_rng(seed)
    N, lam = herm_occupation(rng, d, 1.0)
    rho = state.gibbs_state_from_occupations(N, Statistics.FERMIONIC)
    assert abs(np.trace(rho) - 1) < 1e-12 and np.linalg.eigvalsh(rho).min() > -1e-12
    assert np.abs(state.occupation_matrix(rho, state.fermion_operators(d)) - N).max() < 1e-10
    S = thermo.von_neumann_entropy(rho)
    assert S == pytest.approx(thermo.gaussian_entropy(lam, Statistics.FERMIONIC), abs=1e-9)


@given(st.integers(0, 2**31))
def test_bosonic_two_mode_round_trip(seed):
    rng = np.random.default_rng(seed)
    N, lam = herm_occupation(rng, 2, 0.3)
    rho = state.gibbs_state_from_occupations(N, Statistics.BOSONIC, n_max=24)
    ops = state.boson_operators(state.boson_basis(2, 24))
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.abs(state.occupation_matrix(rho, ops) - N).max() < 1e-10
    assert thermo.von_neumann_entropy(rho) == pytest.approx(thermo.gaussian_entropy(lam, Statistics.BOSONIC), abs=1e-7)


def test_gibbs_eigenvalue_checks():
    with pytest.raises(EigenvalueOutOfRange):
        state.gibbs_state_from_occupations(np.diag([1.2, 0.1]), Statistics.FERMIONIC)
    with pytest.raises(EigenvalueOutOfRange):
        state.gibbs_state_from_occupations([[-0.1]], Statistics.BOSONIC)
