import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from thermoforge import greens, quadrature
from thermoforge.errors import GridTooShort, StepTooLarge
from thermoforge.model import Lorentzian, Statistics

from conftest import one_mode


def lorentz_u_exact(eps, sd, t):
    """u for an exponential kernel: an auxiliary mode makes the problem Markovian."""
    A = np.array([[-1j * eps, -1.0], [np.pi * sd.gamma * sd.d, -sd.d]])
    return np.array([expm(A * s)[0, 0] for s in t])


def solve(system, t_max, dt):
    times = np.arange(int(round(t_max / dt)) + 1) * dt
    k = quadrature.memory_kernels(system, times)
    return greens.solve_u(system.energy_matrix, k, dt), k


def test_uncoupled_u_is_free_evolution():
    system = one_mode(Lorentzian(0.0, 1.0), stat=Statistics.FERMIONIC, eps=1.3)
    g, _ = solve(system, 5.0, 0.01)
    assert np.allclose(g.u[:, 0, 0], np.exp(-1.3j * g.times), atol=1e-4)


def test_u_matches_exponential_kernel_oracle():
    sd = Lorentzian(0.4, 3.0)
    system = one_mode(sd, stat=Statistics.FERMIONIC, eps=1.0)
    g, _ = solve(system, 10.0, 0.005)
    assert np.abs(g.u[:, 0, 0] - lorentz_u_exact(1.0, sd, g.times)).max() < 2e-5


def test_solver_is_second_order():
    sd = Lorentzian(0.4, 3.0)
    system = one_mode(sd, stat=Statistics.FERMIONIC, eps=1.0)
    errs = []
    for dt in (0.02, 0.01):
        g, _ = solve(system, 8.0, dt)
        errs.append(np.abs(g.u[:, 0, 0] - lorentz_u_exact(1.0, sd, g.times)).max())
    assert 0.2 <= errs[1] / errs[0] <= 0.3


def direct_v(u, gt, dt):
    """Double trapezoid sum for v(t_n), O(n^2) per point."""
    n = len(u)
    out = np.zeros(n, dtype=complex)
    for m in range(1, n):
        w = np.full(m + 1, dt)
        w[0] = w[-1] = dt / 2
        i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
        lag = i - j
        kern = np.where(lag >= 0, gt[np.abs(lag)], np.conj(gt[np.abs(lag)]))
        out[m] = np.einsum("i,ij,j->", w * u[m - np.arange(m + 1)], kern, w * np.conj(u[m - np.arange(m + 1)]))
    return out


def test_v_matches_direct_double_sum(lorentz_dot):
    g, k = solve(lorentz_dot, 2.0, 0.02)
    occ = greens.accumulate_v(g, k, fermionic=True)
    ref = direct_v(g.u[:, 0, 0], k.gt[:, 0, 0], g.dt)
    assert np.allclose(occ.v[:, 0, 0], ref.real, atol=1e-10)


@given(st.floats(0.01, 2.0), st.floats(0.5, 10.0), st.floats(-3.0, 3.0), st.floats(0.05, 5.0), st.floats(-2, 2))
def test_u_norm_bounded_and_v_psd(gamma, d, eps, T, mu):
    system = one_mode(Lorentzian(gamma, d), T=T, eps=eps, stat=Statistics.FERMIONIC, mu=mu)
    dt = min(0.02, 0.5 / max(abs(eps), np.sqrt(np.pi * gamma * d), 1.0))
    g, k = solve(system, 3.0, dt)
    assert g.norms().max() <= 1.0 + 1e-6
    occ = greens.accumulate_v(g, k, fermionic=True)
    assert occ.min_eigenvalue >= -1e-8
    assert np.all(occ.v[:, 0, 0].real <= 1 + 1e-6)


def test_step_too_large():
    system = one_mode(Lorentzian(0.5, 4.0), stat=Statistics.FERMIONIC, eps=50.0)
    with pytest.raises(StepTooLarge):
        solve(system, 1.0, 0.1)


def test_check_decay_states(lorentz_dot):
    g, _ = solve(lorentz_dot, 30.0, 0.01)
    assert greens.check_decay(g) is greens.DecayStatus.STEADY_REACHED
    g, _ = solve(lorentz_dot, 1.5, 0.01)
    with pytest.raises(GridTooShort):
        greens.check_decay(g)
    free = one_mode(Lorentzian(0.0, 1.0), stat=Statistics.FERMIONIC)
    g, _ = solve(free, 5.0, 0.01)
    assert greens.check_decay(g) is greens.DecayStatus.LOCALIZED_MODE_SUSPECTED


def test_binary_round_trip(tmp_path, lorentz_dot):
    g, k = solve(lorentz_dot, 1.0, 0.01)
    occ = greens.accumulate_v(g, k, fermionic=True)
    path = tmp_path / "uv.bin"
    greens.dump_binary(path, g, occ)
    out = greens.load_binary(path)
    u, v = out[1], out[2]
    assert np.array_equal(u, g.u) and np.array_equal(v, occ.v)
