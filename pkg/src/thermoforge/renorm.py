"""Renormalized energy, dissipation and fluctuation coefficients from u, v.

    i eps_r(t) + gamma(t) = M(t) = -udot(t) u(t)^-1
    gamma_tilde(t)        = vdot(t) + M(t) v(t) + v(t) M(t)^dag
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import errors
from .greens import GreenFunctionU, OccupationV


@dataclass(frozen=True, eq=False)
class RenormCoefficients:
    times: np.ndarray
    eps_r: np.ndarray  # (n, d, d) Hermitian
    gamma: np.ndarray  # (n, d, d) Hermitian
    gamma_tilde: np.ndarray  # (n, d, d)
    eps_r_inf: np.ndarray
    gamma_inf: np.ndarray
    reliable_index: int  # last index where u is well conditioned
    frozen: bool  # coefficients past reliable_index were held constant

    @property
    def last_reliable_time(self) -> float:
        return float(self.times[self.reliable_index])

    @property
    def M(self) -> np.ndarray:
        return 1j * self.eps_r + self.gamma


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _min_singular(u: np.ndarray) -> np.ndarray:
    if u.shape[1] == 1:
        return np.abs(u[:, 0, 0])
    return np.linalg.svd(u, compute_uv=False)[:, -1]


def renorm_coefficients(green: GreenFunctionU, occ: OccupationV | None = None,
                        u_floor: float = 1e-2, window: float = 0.1,
                        min_points: int = 8) -> RenormCoefficients:
    """Split M = -udot u^-1 into Hermitian energy and rate parts.

    udot comes from the discrete Dyson equation (same order as the solver).
    Once the smallest singular value of u drops below ``u_floor`` the
    coefficients are frozen at the last well-conditioned time; the t -> inf
    values are averages over the last ``window`` fraction of that reliable
    stretch.
    """
    u, udot = green.u, green.udot
    n, d, _ = u.shape
    smin = _min_singular(u)
    bad = np.nonzero(smin < u_floor)[0]
    rel = int(bad[0]) - 1 if bad.size else n - 1
    if rel < min_points:
        raise errors.SingularU("u is ill conditioned from the start", last_reliable_time=float(green.times[max(rel, 0)]))

    M = np.empty_like(u)
    if d == 1:
        M[: rel + 1, 0, 0] = -udot[: rel + 1, 0, 0] / u[: rel + 1, 0, 0]
    else:
        # M u = -udot  ->  u^T M^T = -udot^T
        sol = np.linalg.solve(np.swapaxes(u[: rel + 1], 1, 2), -np.swapaxes(udot[: rel + 1], 1, 2))
        M[: rel + 1] = np.swapaxes(sol, 1, 2)
    M[rel + 1:] = M[rel]

    Md = _dagger(M)
    eps_r = (M - Md) / 2j
    gam = (M + Md) / 2
    if occ is not None:
        v = occ.v
        vdot = np.gradient(v, green.dt, axis=0, edge_order=2)
        gt = vdot + M @ v + v @ Md
    else:
        gt = np.zeros_like(M)

    t_rel = green.times[rel] - green.times[0]
    start = np.searchsorted(green.times - green.times[0], (1.0 - window) * t_rel)
    start = min(start, rel)
    sl = slice(start, rel + 1)
    return RenormCoefficients(
        times=green.times,
        eps_r=eps_r,
        gamma=gam,
        gamma_tilde=gt,
        eps_r_inf=eps_r[sl].mean(axis=0),
        gamma_inf=gam[sl].mean(axis=0),
        reliable_index=rel,
        frozen=rel < n - 1,
    )


def defining_residual(green: GreenFunctionU, coeffs: RenormCoefficients) -> float:
    """max_t |i eps_r + gamma + udot u^-1| over the reliable stretch."""
    sl = slice(0, coeffs.reliable_index + 1)
    lhs = coeffs.M[sl] @ green.u[sl] + green.udot[sl]
    return float(np.abs(lhs).max())


def reconstruct_u(coeffs: RenormCoefficients, dt: float) -> np.ndarray:
    """Integrate du/dt = -(i eps_r + gamma) u by the trapezoidal rule."""
    M = coeffs.M
    n, d, _ = M.shape
    eye = np.eye(d)
    u = np.empty_like(M)
    u[0] = eye
    for m in range(1, n):
        u[m] = np.linalg.solve(eye + 0.5 * dt * M[m], (eye - 0.5 * dt * M[m - 1]) @ u[m - 1])
    return u
