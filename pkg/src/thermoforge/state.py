"""Explicit density matrices: exact single-mode Fock solution, quantum dot, Gibbs states.

The single-mode solution for an initial state sum_lm rho_lm |l><m| reads

    rho(t) = sum_lm rho_lm sum_k d_k A^dag_lk rho~[v] A_mk,
    A^dag_lk = sqrt(l!) / ((l-k)! sqrt(k!)) [u a^dag / (1 + v)]^(l-k),
    d_k = [1 - |u|^2 / (1 + v)]^k,
    rho~[v] = sum_n v^n / (1 + v)^(n+1) |n><n|.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from . import errors
from .model import Statistics

TAIL_TOL = 1e-8
MAX_FOCK_DIM = 6000


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    rho: np.ndarray
    n_max: int
    tail: float  # probability mass dropped by the truncation

    def mean_number(self) -> float:
        return float(np.real(np.arange(self.n_max + 1) @ np.diag(self.rho)))

    def entropy(self) -> float:
        from .thermo import von_neumann_entropy
        return von_neumann_entropy(self.rho)


def default_n_max(l_max: int, v: float) -> int:
    """L_max + ceil(20 v), widened until the geometric tail is below 1e-12."""
    n = l_max + math.ceil(20 * v)
    if v > 0:
        x = v / (1.0 + v)
        n = max(n, l_max + math.ceil(math.log(1e-12) / math.log(x)))
    return max(n, l_max + 1)


def _as_rho0(rho0) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = np.outer(rho0, rho0.conj())
    if rho0.shape[0] != rho0.shape[1]:
        raise errors.InvalidInitialState("Fock coefficients must be a vector or a square matrix")
    if not np.allclose(rho0, rho0.conj().T, atol=1e-12):
        raise errors.InvalidInitialState("initial density matrix is not Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-10:
        raise errors.InvalidInitialState("initial density matrix must have unit trace", trace=float(np.trace(rho0).real))
    if np.linalg.eigvalsh(rho0).min() < -1e-10:
        raise errors.InvalidInitialState("initial density matrix is not positive")
    return rho0


def fock_density_matrix(rho0, u: complex, v: float, n_max: Optional[int] = None) -> FockDensityMatrix:
    """Exact reduced density matrix of one bosonic mode at a single time.

    ``rho0`` holds the initial coefficients rho_lm (a vector c_l is read as
    the pure state c_l c_m*). The result is renormalized to unit trace; the
    dropped mass is reported and must stay below 1e-8.
    """
    rho0 = _as_rho0(rho0)
    v = float(v)
    if v < 0:
        raise errors.InvalidInitialState("v must be non-negative", v=v)
    l_max = rho0.shape[0] - 1
    if n_max is None:
        n_max = default_n_max(l_max, v)
    if n_max + 1 > MAX_FOCK_DIM:
        raise errors.MemoryBudgetExceeded("Fock truncation too large", n_max=n_max)
    dim = n_max + 1
    n = np.arange(dim)
    if v > 0:
        logp = n * math.log(v) - (n + 1) * math.log1p(v)
    else:
        logp = np.where(n == 0, 0.0, -np.inf)
    au = u / (1.0 + v)
    d = 1.0 - abs(u) ** 2 / (1.0 + v)
    rho = np.zeros((dim, dim), dtype=complex)
    lgf = gammaln(np.arange(dim + l_max + 1) + 1.0)  # log k!
    for l, m in zip(*np.nonzero(rho0)):
        c = rho0[l, m]
        for k in range(min(l, m) + 1):
            dk = d**k if k else 1.0
            if dk == 0:
                continue
            p, q = l - k, m - k
            pref = (0.5 * lgf[l] - lgf[p] - 0.5 * lgf[k]) + (0.5 * lgf[m] - lgf[q] - 0.5 * lgf[k])
            top = dim - max(p, q)
            if top <= 0:
                continue
            nn = n[:top]
            # (a^dag)^p |n> = sqrt((n+p)!/n!) |n+p>
            lcoef = pref + logp[:top] + 0.5 * (lgf[nn + p] - lgf[nn]) + 0.5 * (lgf[nn + q] - lgf[nn])
            phase = c * dk * au**p * np.conj(au) ** q
            rho[nn + p, nn + q] += phase * np.exp(lcoef)
    tr = float(np.trace(rho).real)
    tail = max(0.0, 1.0 - tr)
    if tail > TAIL_TOL:
        raise errors.TruncationTooSmall("Fock truncation drops too much probability", tail=tail, n_max=n_max)
    rho = 0.5 * (rho + rho.conj().T) / tr
    return FockDensityMatrix(rho, n_max, tail)


def fock_trajectory(rho0, u: np.ndarray, v: np.ndarray, n_max: Optional[int] = None, stride: int = 1):
    """Fock solution on every ``stride``-th point of a scalar (u, v) series."""
    u = np.asarray(u).reshape(len(u), -1)[:, 0]
    v = np.real(np.asarray(v).reshape(len(v), -1)[:, 0])
    if n_max is None:
        n_max = default_n_max(np.asarray(rho0).shape[0] - 1, float(v.max()))
    idx = np.arange(0, len(u), stride)
    if idx[-1] != len(u) - 1:
        idx = np.append(idx, len(u) - 1)
    return idx, [fock_density_matrix(rho0, u[k], v[k], n_max) for k in idx]


# -- quantum dot ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DotDensityMatrix:
    """Two-level fermionic dot in the basis |0>, |up>, |down>, |up down>."""

    rho: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))

    @property
    def coherence(self) -> complex:
        return complex(self.rho[1, 2])


def dot_density_matrix(v: np.ndarray) -> DotDensityMatrix:
    """rho_00 = det(1 - v), rho_33 = det v, rho_ii = v_ii - rho_33, rho_12 = v_12."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (2, 2):
        raise errors.OccupationOutOfRange("dot occupation must be 2x2", shape=v.shape)
    lam = np.linalg.eigvalsh(0.5 * (v + v.conj().T))
    if lam.min() < -1e-10 or lam.max() > 1 + 1e-10:
        raise errors.OccupationOutOfRange("dot occupation eigenvalues must lie in [0, 1]", eigenvalues=lam.tolist())
    r33 = np.linalg.det(v).real
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = np.linalg.det(np.eye(2) - v).real
    rho[1, 1] = v[0, 0].real - r33
    rho[2, 2] = v[1, 1].real - r33
    rho[3, 3] = r33
    rho[1, 2] = v[0, 1]
    rho[2, 1] = np.conj(v[0, 1])
    return DotDensityMatrix(rho)


# -- many-mode Fock spaces ---------------------------------------------------

def fermion_operators(d: int) -> list:
    """Annihilators on 2^d states; index = sum_i n_i 2^i, Jordan-Wigner signs."""
    dim = 2**d
    ops = []
    for i in range(d):
        a = np.zeros((dim, dim))
        for s in range(dim):
            if s >> i & 1:
                sign = (-1) ** bin(s & ((1 << i) - 1)).count("1")
                a[s ^ (1 << i), s] = sign
        ops.append(a)
    return ops


def boson_basis(d: int, n_tot: int) -> list:
    """Occupation tuples with total number <= n_tot, grouped by total."""
    basis = []
    for total in range(n_tot + 1):
        for combo in itertools.combinations_with_replacement(range(d), total):
            occ = [0] * d
            for c in combo:
                occ[c] += 1
            basis.append(tuple(occ))
    return basis


def boson_operators(basis: list) -> list:
    index = {s: k for k, s in enumerate(basis)}
    d = len(basis[0])
    ops = []
    for i in range(d):
        a = np.zeros((len(basis), len(basis)))
        for k, s in enumerate(basis):
            if s[i]:
                t = list(s)
                t[i] -= 1
                a[index[tuple(t)], k] = math.sqrt(s[i])
        ops.append(a)
    return ops


def mode_rotation(W: np.ndarray, ops: list) -> np.ndarray:
    """Fock-space unitary G = exp(sum_ij X_ij a_i^dag a_j), X = log W.

    G a_k^dag G^dag = sum_i W_ik a_i^dag: single-particle states transform
    by W, so a product state in the eigenmodes of N = W diag(lam) W^dag is
    carried to the state with occupation matrix N.
    """
    X = linalg.logm(W)
    G = sum(X[i, j] * ops[i].T @ ops[j] for i in range(len(ops)) for j in range(len(ops)))
    return linalg.expm(G)


def occupation_matrix(rho: np.ndarray, ops: list) -> np.ndarray:
    """N_ij = Tr[a_j^dag a_i rho]."""
    d = len(ops)
    return np.array([[np.trace(ops[j].T @ ops[i] @ rho) for j in range(d)] for i in range(d)])


def _boson_weights(lam: np.ndarray, basis: list) -> np.ndarray:
    occ = np.array(basis, dtype=float)
    with np.errstate(divide="ignore"):
        logl = np.where(lam > 0, np.log(np.where(lam > 0, lam, 1.0)), -np.inf)
        terms = np.where(occ > 0, occ * logl, 0.0) - (occ + 1.0) * np.log1p(lam)
    return np.exp(terms.sum(axis=1))


def _fermion_weights(lam: np.ndarray, d: int) -> np.ndarray:
    p = np.ones(2**d)
    for s in range(2**d):
        for i in range(d):
            p[s] *= lam[i] if s >> i & 1 else 1.0 - lam[i]
    return p


def gibbs_state_from_occupations(nbar, stat: Statistics, n_max: Optional[int] = None) -> np.ndarray:
    """Gaussian (Gibbs) density matrix with occupation matrix ``nbar``.

    Diagonalizes nbar = W diag(lam) W^dag, builds the product state in the
    eigenmodes (geometric / Bernoulli weights) and rotates it back into the
    original mode basis. Bosons use the Fock basis truncated at total number
    ``n_max``; one mode gives the diagonal geometric state directly.
    """
    nbar = np.atleast_2d(np.asarray(nbar, dtype=complex))
    d = nbar.shape[0]
    lam, W = np.linalg.eigh(0.5 * (nbar + nbar.conj().T))
    if stat is Statistics.FERMIONIC:
        if lam.min() < -1e-12 or lam.max() > 1 + 1e-12:
            raise errors.EigenvalueOutOfRange("fermionic occupations must lie in [0, 1]", eigenvalues=lam.tolist())
        lam = np.clip(lam, 0.0, 1.0)
        ops = fermion_operators(d)
        p = _fermion_weights(lam, d)
        rho = np.diag(p).astype(complex)
    else:
        if lam.min() < -1e-12:
            raise errors.EigenvalueOutOfRange("bosonic occupations must be non-negative", eigenvalues=lam.tolist())
        lam = np.clip(lam, 0.0, None)
        if n_max is None:
            n_max = default_n_max(0, float(lam.max()))
        if d == 1:
            n = np.arange(n_max + 1)
            l0 = lam[0]
            p = np.where(n == 0, 1.0, 0.0) if l0 == 0 else np.exp(n * np.log(l0) - (n + 1) * np.log1p(l0))
            tail = 1.0 - p.sum()
            if tail > TAIL_TOL:
                raise errors.TruncationTooSmall("Fock truncation drops too much probability", tail=tail, n_max=n_max)
            return np.diag(p / p.sum()).astype(complex)
        basis = boson_basis(d, n_max)
        if len(basis) > MAX_FOCK_DIM:
            raise errors.MemoryBudgetExceeded("multi-mode Fock basis too large", size=len(basis))
        ops = boson_operators(basis)
        p = _boson_weights(lam, basis)
        tail = 1.0 - p.sum()
        if tail > TAIL_TOL:
            raise errors.TruncationTooSmall("Fock truncation drops too much probability", tail=tail, n_max=n_max)
        rho = np.diag(p / p.sum()).astype(complex)
    if np.allclose(W, np.eye(d)):
        return rho
    G = mode_rotation(W, ops)
    rho = G @ rho @ G.conj().T
    return 0.5 * (rho + rho.conj().T)
