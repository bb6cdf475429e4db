"""Thermodynamic trajectory: occupations, energy, entropy, T_r, mu_r, work, heat.

Occupation matrices use N_ij = <a_j^dag a_i>. The renormalized temperature
and chemical potential are fitted so that the occupation eigenvalues follow
the Bose-Einstein / Fermi-Dirac law at the renormalized levels; for one
bosonic mode this is T_r = omega_r / ln(1 + 1/n), which equals dE/dS at
fixed omega_r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import errors
from .model import Statistics


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


# -- occupations, energy, entropy ---------------------------------------------

def occupation_trajectory(u: np.ndarray, v: np.ndarray, n0: np.ndarray) -> np.ndarray:
    """N(t) = u N(t0) u^dag + v, symmetrized."""
    n = u @ np.asarray(n0, dtype=complex) @ _dagger(u) + v
    return 0.5 * (n + _dagger(n))


def internal_energy(eps_r: np.ndarray, n: np.ndarray) -> np.ndarray:
    """E = Tr[eps_r N] on every grid point (zero-point energy excluded)."""
    return np.real(np.einsum("...ij,...ji->...", eps_r, n))


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, x * np.log(safe), 0.0)


def gaussian_entropy(lam, stat: Statistics) -> np.ndarray:
    """Von Neumann entropy (units of k_B) of a Gaussian state from the
    eigenvalues of its occupation matrix; the last axis is summed."""
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    if stat is Statistics.BOSONIC:
        s = _xlogx(1.0 + lam) - _xlogx(lam)
    else:
        lam = np.clip(lam, 0.0, 1.0)
        s = -_xlogx(lam) - _xlogx(1.0 - lam)
    return s.sum(axis=-1)


def von_neumann_entropy(rho: np.ndarray) -> float:
    p = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return float(-_xlogx(np.clip(p, 0.0, None)).sum())


def entropy(n: Optional[np.ndarray] = None, stat: Optional[Statistics] = None,
            rho: Optional[np.ndarray] = None, gaussian: bool = True) -> float:
    """S / k_B from an occupation matrix (Gaussian states) or an explicit rho."""
    if rho is not None:
        return von_neumann_entropy(rho)
    if not gaussian:
        raise errors.NonGaussianStateRequiresFockPath("non-Gaussian state: pass the density matrix")
    if n is None or stat is None:
        raise ValueError("entropy needs either rho or (n, stat)")
    lam = np.linalg.eigvalsh(np.atleast_2d(n))
    return float(gaussian_entropy(lam, stat))


# -- Gibbs fit ---------------------------------------------------------------

@dataclass(frozen=True)
class GibbsFit:
    T: float
    mu: float
    residual: float
    iterations: int = 0

    @property
    def beta(self) -> float:
        return 1.0 / self.T if self.T != 0 else math.inf


def bose(e, T, mu=0.0):
    x = (np.asarray(e, dtype=float) - mu) / T
    return 1.0 / np.expm1(x)


def fermi(e, T, mu):
    from scipy.special import expit
    return expit(-(np.asarray(e, dtype=float) - mu) / T)


def _levels_in_occupation_basis(eps_r, n):
    lam, W = np.linalg.eigh(0.5 * (n + n.conj().T))
    e = np.real(np.einsum("ji,jk,ki->i", W.conj(), eps_r, W))
    return lam, e


def renorm_temperature_mu(eps_r, n, stat: Statistics, tol: float = 1e-12, max_iter: int = 60) -> GibbsFit:
    """Fit (T_r, mu_r) so the occupations are BE/FD at the renormalized levels.

    The fit runs in the eigenbasis of N against the diagonal of eps_r in
    that basis. Bosons have mu_r = 0 and a closed form for one mode;
    fermions start from the linear least-squares solution in logit space,
    ln(1/lam - 1) = beta e - beta mu, polished by damped Gauss-Newton on the
    occupations themselves.
    """
    eps_r = np.atleast_2d(np.asarray(eps_r, dtype=complex))
    n = np.atleast_2d(np.asarray(n, dtype=complex))
    lam, e = _levels_in_occupation_basis(eps_r, n)

    if stat is Statistics.BOSONIC:
        if np.any(lam < 0):
            raise errors.OccupationOutOfRange("negative bosonic occupation", eigenvalues=lam.tolist())
        if np.all(lam == 0):
            return GibbsFit(0.0, 0.0, 0.0)
        if np.any(lam == 0):
            raise errors.OccupationOutOfRange("bosonic occupation on the boundary", eigenvalues=lam.tolist())
        L = np.log1p(1.0 / lam)
        beta = float(np.dot(e, L) / np.dot(e, e))
        T = 1.0 / beta
        res = float(np.abs(bose(e, T) - lam).max()) if beta > 0 else math.inf
        return GibbsFit(T, 0.0, res)

    if len(lam) < 2:
        raise errors.DegenerateSystem("one fermionic level cannot fix both T and mu")
    if np.any(lam <= 0) or np.any(lam >= 1):
        raise errors.OccupationOutOfRange("fermionic occupations must lie strictly inside (0, 1)", eigenvalues=lam.tolist())
    if np.ptp(e) < 1e-12 * max(1.0, np.abs(e).max()):
        raise errors.DegenerateSystem("all renormalized levels coincide; T and mu are underdetermined")

    logit = np.log((1.0 - lam) / lam)
    A = np.column_stack([e, -np.ones_like(e)])
    (beta, b), *_ = np.linalg.lstsq(A, logit, rcond=None)

    def resid(beta, b):
        return fermi(beta * e - b, 1.0, 0.0) - lam

    r = resid(beta, b)
    cost = float(r @ r)
    it = 0
    for it in range(1, max_iter + 1):
        if math.sqrt(cost) < tol:
            break
        f = r + lam
        s = -f * (1.0 - f)
        Jm = np.column_stack([s * e, -s])
        step, *_ = np.linalg.lstsq(Jm, -r, rcond=None)
        damp = 1.0
        while damp > 1e-6:
            nb, nbb = beta + damp * step[0], b + damp * step[1]
            nr = resid(nb, nbb)
            ncost = float(nr @ nr)
            if ncost < cost:
                break
            damp *= 0.5
        else:
            break
        if cost - ncost < 1e-32:
            beta, b, r, cost = nb, nbb, nr, ncost
            break
        beta, b, r, cost = nb, nbb, nr, ncost
    residual = float(np.abs(r).max())
    if len(lam) == 2 and residual > 1e-8:
        raise errors.NewtonNonConvergence("Gibbs fit did not converge", T=1.0 / beta, mu=b / beta, residual=residual)
    if beta == 0:
        raise errors.DegenerateSystem("equal occupations at distinct levels: infinite temperature")
    return GibbsFit(1.0 / beta, b / beta, residual, it)


def fit_series(eps_r, n, stat):
    """Vectorized Gibbs fit over a time series; NaN where undefined.

    Exact in closed form for one bosonic mode and for two fermionic levels;
    other shapes fall back to the per-point fit.
    """
    m, d, _ = n.shape
    if d == 1 and stat is Statistics.BOSONIC:
        lam = n[:, 0, 0].real
        w = eps_r[:, 0, 0].real
        with np.errstate(divide="ignore", invalid="ignore"):
            T = np.where(lam > 0, w / np.log1p(1.0 / np.where(lam > 0, lam, 1.0)), 0.0)
        T = np.where(lam < 0, np.nan, T)
        return T, np.zeros(m), np.zeros(m)
    lam, W = np.linalg.eigh(0.5 * (n + _dagger(n)))
    e = np.real(np.einsum("tji,tjk,tki->ti", W.conj(), eps_r, W))
    if d == 2 and stat is Statistics.FERMIONIC:
        with np.errstate(divide="ignore", invalid="ignore"):
            logit = np.log((1.0 - lam) / lam)
            beta = (logit[:, 1] - logit[:, 0]) / (e[:, 1] - e[:, 0])
            b = beta * e[:, 0] - logit[:, 0]
            ok = np.all((lam > 0) & (lam < 1), axis=1) & np.isfinite(beta) & (beta != 0)
            T = np.where(ok, 1.0 / beta, np.nan)
            mu = np.where(ok, b / beta, np.nan)
            res = np.where(ok, np.abs(fermi(e, T[:, None], mu[:, None]) - lam).max(axis=1), np.nan)
        return T, mu, res
    T = np.full(m, np.nan)
    mu = np.full(m, np.nan)
    res = np.full(m, np.nan)
    for k in range(m):
        try:
            fit = renorm_temperature_mu(eps_r[k], n[k], stat)
        except (errors.OccupationOutOfRange, errors.DegenerateSystem, errors.NewtonNonConvergence):
            continue
        T[k], mu[k], res[k] = fit.T, fit.mu, fit.residual
    return T, mu, res


# -- trajectory -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ThermoTrajectory:
    times: np.ndarray
    n: np.ndarray
    E: np.ndarray
    S: np.ndarray
    N: np.ndarray
    T: np.ndarray
    mu: np.ndarray
    W: np.ndarray  # cumulative work
    Q: np.ndarray  # cumulative heat
    Wc: np.ndarray  # cumulative chemical work
    F: np.ndarray
    closure: np.ndarray  # cumulative E - E0 - W - Q - Wc
    fit_residual: float
    extras: dict = field(default_factory=dict)

    @property
    def start(self) -> int:
        return int(self.extras.get("bookkeeping_start", 0))

    @property
    def relative_closure(self) -> float:
        dE = abs(self.E[-1] - self.E[self.start])
        return float(abs(self.closure[-1]) / dE) if dE > 0 else float(abs(self.closure[-1]))


@dataclass(frozen=True, eq=False)
class WorkHeat:
    W: np.ndarray
    Q: np.ndarray
    Wc: np.ndarray
    closure: np.ndarray


def work_heat_decomposition(eps_r, n, S, stat: Statistics, tol: Optional[float] = None, start: int = 0) -> WorkHeat:
    """Cumulative work, heat and chemical work along a trajectory.

    dW = Tr[N d eps_r] uses interval-averaged N, so that dW plus
    Tr[eps_r dN] telescopes to dE exactly. dQ = T_r dS and dW_c = mu_r dN
    take (T_r, mu_r) fitted at the interval midpoint, which keeps the rule
    second order and never evaluates T_r at t0, where a fermionic vacuum
    start makes it singular. Accumulation begins at grid index ``start``
    (all series are zero before it). The closure E - E(start) - W - Q - W_c
    is returned; with ``tol`` set a ClosureViolation is raised when
    |closure| / |dE| exceeds it.
    """
    eps_mid = 0.5 * (eps_r[1:] + eps_r[:-1])
    n_mid = 0.5 * (n[1:] + n[:-1])
    dW = np.real(np.einsum("tij,tji->t", np.diff(eps_r, axis=0), n_mid))
    T_mid, mu_mid, _ = fit_series(eps_mid, n_mid, stat)
    dS = np.diff(S)
    dN = np.diff(np.real(np.trace(n, axis1=1, axis2=2)))
    dQ = np.where(dS == 0, 0.0, T_mid * dS)
    dWc = np.where(dN == 0, 0.0, mu_mid * dN)
    E = internal_energy(eps_r, n)
    dE = np.diff(E)
    for x in (dW, dQ, dWc, dE):
        x[:start] = 0.0
    cum = lambda x: np.concatenate([[0.0], np.cumsum(x)])
    closure = cum(dE - dW - dQ - dWc)
    if tol is not None:
        ref = abs(E[-1] - E[start])
        rel = abs(closure[-1]) / ref if ref > 0 else abs(closure[-1])
        if rel > tol:
            raise errors.ClosureViolation("first-law closure exceeds tolerance; refine the grid", relative=rel)
    return WorkHeat(cum(dW), cum(dQ), cum(dWc), closure)


def bookkeeping_start(T, stat: Statistics, T_ref: float, factor: float = 5.0) -> int:
    """First index from which heat and chemical work are accumulated.

    A bosonic start, or any start where the Gibbs fit is regular, uses t0.
    An initially empty (or full) fermionic system has no Gibbs fit at t0:
    with identical couplings to every level T_r diverges as t -> t0 while
    mu_r diverges with the opposite sign, so Q and W_c separately diverge
    and only their sum is finite. Accumulation then starts at the first
    point where T_r has come down to ``factor * T_ref``.
    """
    if stat is Statistics.BOSONIC or np.isfinite(T[0]):
        return 0
    ok = np.isfinite(T) & (np.abs(T) <= factor * T_ref)
    idx = np.nonzero(ok)[0]
    return int(idx[0]) if idx.size else 0


def thermo_trajectory(times, eps_r, n, stat: Statistics, S: Optional[np.ndarray] = None,
                      T_ref: Optional[float] = None) -> ThermoTrajectory:
    """Assemble E, S, N, T_r, mu_r, W, Q, W_c, F along the time grid.

    Without ``S`` the state is taken as Gaussian (entropy from the occupation
    eigenvalues, T_r and mu_r from the instantaneous Gibbs fit). With an
    explicit entropy series from density matrices, T_r = (dE/dt)/(dS/dt) at
    fixed levels instead. ``T_ref`` (default: the final T_r) sets where the
    work/heat bookkeeping starts for singular fermionic starts, see
    bookkeeping_start.
    """
    eps_r = np.asarray(eps_r)
    n = np.asarray(n)
    E = internal_energy(eps_r, n)
    N = np.real(np.trace(n, axis1=1, axis2=2))
    gaussian = S is None
    if gaussian:
        lam = np.linalg.eigvalsh(n)
        S = gaussian_entropy(lam, stat)
        T, mu, res = fit_series(eps_r, n, stat)
        residual = float(np.nanmax(res)) if np.any(np.isfinite(res)) else 0.0
    else:
        heat_rate = np.real(np.einsum("tij,tji->t", eps_r, np.gradient(n, times, axis=0)))
        dS = np.gradient(S, times)
        with np.errstate(divide="ignore", invalid="ignore"):
            T = np.where(np.abs(dS) > 1e-14, heat_rate / dS, np.nan)
        mu = np.zeros_like(T)
        residual = float("nan")
    start = 0
    if gaussian:
        if T_ref is None:
            T_ref = abs(float(T[-1])) if np.isfinite(T[-1]) else 1.0
        start = bookkeeping_start(T, stat, T_ref)
        wh = work_heat_decomposition(eps_r, n, S, stat, start=start)
    else:
        wh = _work_heat_explicit(eps_r, n, S, T, E)
    F = free_energy(E, T, S)
    return ThermoTrajectory(times, n, E, S, N, T, mu, wh.W, wh.Q, wh.Wc, F, wh.closure, residual,
                            extras={"bookkeeping_start": start})


def _work_heat_explicit(eps_r, n, S, T, E):
    n_mid = 0.5 * (n[1:] + n[:-1])
    dW = np.real(np.einsum("tij,tji->t", np.diff(eps_r, axis=0), n_mid))
    T_mid = 0.5 * (T[1:] + T[:-1])
    dQ = np.nan_to_num(T_mid * np.diff(S))
    cum = lambda x: np.concatenate([[0.0], np.cumsum(x)])
    zeros = np.zeros(len(E))
    return WorkHeat(cum(dW), cum(dQ), zeros, cum(np.diff(E) - dW - dQ))


# -- free energy ---------------------------------------------------------------

def free_energy(E, T, S):
    """Helmholtz free energy F = E - T_r S (F = E where S = 0)."""
    E, T, S = (np.asarray(x, dtype=float) for x in (E, T, S))
    return np.where(S == 0, E, E - np.nan_to_num(T) * S)


def gibbs_free_energy(levels, T: float, mu: float, stat: Statistics) -> float:
    """-T ln Z + mu N of the Gibbs state at the renormalized parameters.

    With mu = 0 (bosons) this is -T ln Z; for one mode it reduces to
    T ln(1 - exp(-omega_r / T)).
    """
    x = (np.asarray(levels, dtype=float) - mu) / T
    if stat is Statistics.BOSONIC:
        lnZ = -np.sum(np.log(-np.expm1(-x)))
        Nbar = np.sum(1.0 / np.expm1(x))
    else:
        lnZ = np.sum(np.logaddexp(0.0, -x))
        Nbar = np.sum(fermi(levels, T, mu))
    return float(-T * lnZ + mu * Nbar)


def free_energy_identity_residual(traj: ThermoTrajectory) -> float:
    """max |F(t) - F(0) - [W + int mu dN - int S dT_r]| relative to max |F|.

    dF = dW + mu dN - S dT_r follows from F = E - T S and the first law.
    """
    T = np.nan_to_num(traj.T)
    S = traj.S
    S_mid = 0.5 * (S[1:] + S[:-1])
    dT = np.diff(T)
    sdT = np.concatenate([[0.0], np.cumsum(S_mid * dT)])
    rhs = traj.W + traj.Wc - sdT
    # F = E - T S exactly, so its increments see the quadrature of T dS
    lhs = traj.F - traj.F[0]
    ok = np.isfinite(traj.T)
    ok[0] = True
    scale = max(1.0, float(np.abs(traj.F).max()))
    return float(np.abs((lhs - rhs)[ok]).max() / scale)


# -- specific heat ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpecificHeat:
    T0: np.ndarray
    Tr: np.ndarray
    E: np.ndarray
    n: np.ndarray
    C_energy: np.ndarray  # route A: finite difference of E over T_r
    C_gibbs: np.ndarray  # route B: analytic Gibbs-state derivative
    C_entropy: np.ndarray  # T_r dS/dT_r, finite difference
    omega_r: float
    low_T_exponent: float

    @property
    def max_relative_disagreement(self) -> float:
        return float(np.max(np.abs(self.C_energy - self.C_gibbs) / np.abs(self.C_gibbs)))


def _three_point_derivative(x, y):
    """Second-order derivative on a nonuniform grid at interior points."""
    h1 = x[1:-1] - x[:-2]
    h2 = x[2:] - x[1:-1]
    return (-h2 / (h1 * (h1 + h2)) * y[:-2]
            + (h2 - h1) / (h1 * h2) * y[1:-1]
            + h1 / (h2 * (h1 + h2)) * y[2:])


def einstein_heat(omega, T):
    """d/dT [omega n_BE(omega, T)] = x^2 e^x / (e^x - 1)^2, x = omega / T."""
    x = np.asarray(omega, dtype=float) / np.asarray(T, dtype=float)
    em = np.expm1(-x)
    return x * x * np.exp(-x) / (em * em)


def specific_heat(T0, nbar, omega_r: float) -> SpecificHeat:
    """Specific heat of one bosonic mode from a family of steady states.

    ``nbar[k]`` is the exact steady occupation for initial reservoir
    temperature ``T0[k]`` at fixed coupling (omega_r does not depend on T0).
    Route A differentiates E = omega_r nbar over the tabulated T_r; route B
    differentiates the renormalized Gibbs energy analytically.
    """
    T0 = np.asarray(T0, dtype=float)
    nbar = np.asarray(nbar, dtype=float)
    Tr = omega_r / np.log1p(1.0 / nbar)
    if np.any(np.diff(Tr) <= 0):
        bad = int(np.nonzero(np.diff(Tr) <= 0)[0][0])
        raise errors.NonMonotoneTr("T_r(T0) is not increasing; re-grid the sweep", T0=float(T0[bad]))
    E = omega_r * nbar
    S = gaussian_entropy(nbar[:, None], Statistics.BOSONIC)
    C_A = _three_point_derivative(Tr, E)
    C_S = Tr[1:-1] * _three_point_derivative(Tr, S)
    C_B = einstein_heat(omega_r, Tr[1:-1])
    k = max(3, len(C_A) // 20)
    slope = np.polyfit(np.log(Tr[1:k + 1]), np.log(C_A[:k]), 1)[0]
    return SpecificHeat(T0[1:-1], Tr[1:-1], E[1:-1], nbar[1:-1], C_A, C_B, C_S, omega_r, float(slope))
