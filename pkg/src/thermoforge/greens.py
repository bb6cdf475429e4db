"""Time-domain Green functions u(t, t0) and v(t, t).

u solves the Volterra integro-differential (Dyson) equation

    du/dt + i eps u + int_0^t g(t - s) u(s) ds = 0,    u(0) = 1,

and v is the double convolution

    v(t) = int_0^t int_0^t u(s1) gt(s2 - s1) u(s2)^dag ds1 ds2.

Both kernels are stationary, so everything is expressed on the lag grid
t_k = t0 + k dt.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import errors
from .quadrature import KernelTable

# bytes; u, udot, v and the kernels all live on the grid at once
MEMORY_BUDGET = 4 * 1024**3


@dataclass(frozen=True, eq=False)
class GreenFunctionU:
    times: np.ndarray
    u: np.ndarray  # (n, dim, dim)
    udot: np.ndarray  # du/dt from the discrete equation itself
    dt: float
    late_norm: float

    @property
    def dim(self) -> int:
        return self.u.shape[1]

    def norms(self) -> np.ndarray:
        """Spectral norm of u at every grid point."""
        if self.dim == 1:
            return np.abs(self.u[:, 0, 0])
        return np.linalg.norm(self.u, ord=2, axis=(1, 2))


@dataclass(frozen=True, eq=False)
class OccupationV:
    times: np.ndarray
    v: np.ndarray  # (n, dim, dim), Hermitian PSD
    dt: float
    min_eigenvalue: float


class DecayStatus(enum.Enum):
    STEADY_REACHED = "SteadyReached"
    LOCALIZED_MODE_SUSPECTED = "LocalizedModeSuspected"


def _blocks(eps: np.ndarray, kernel: KernelTable) -> list:
    """Connected components of the coupling pattern of eps, g and gt."""
    dim = eps.shape[0]
    pattern = (np.abs(eps) > 0) | np.any(np.abs(kernel.g) > 0, axis=0) | np.any(np.abs(kernel.gt) > 0, axis=0)
    pattern = pattern | pattern.T
    seen, blocks = set(), []
    for start in range(dim):
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.nonzero(pattern[i])[0]:
                if j not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        blocks.append(sorted(comp))
    return blocks


def _solve_scalar(eps: complex, g: np.ndarray, dt: float, n: int):
    u = np.zeros(n, dtype=complex)
    f = np.zeros(n, dtype=complex)
    u[0] = 1.0
    f[0] = -1j * eps
    a = 1.0 + 0.5 * dt * (1j * eps + 0.5 * dt * g[0])
    h = 0.5 * dt
    for m in range(1, n):
        # memory sum without the implicit u_m term
        known = dt * (0.5 * g[m] * u[0] + np.dot(g[m - 1:0:-1], u[1:m]))
        u[m] = (u[m - 1] + h * (f[m - 1] - known)) / a
        f[m] = -1j * eps * u[m] - known - h * g[0] * u[m]
    return u, f


def _solve_matrix(eps: np.ndarray, g: np.ndarray, dt: float, n: int):
    d = eps.shape[0]
    u = np.zeros((n, d, d), dtype=complex)
    f = np.zeros_like(u)
    u[0] = np.eye(d)
    f[0] = -1j * eps
    a = np.eye(d) + 0.5 * dt * (1j * eps + 0.5 * dt * g[0])
    a_inv = np.linalg.inv(a)
    h = 0.5 * dt
    for m in range(1, n):
        known = 0.5 * g[m] @ u[0]
        if m > 1:
            known = known + np.tensordot(g[m - 1:0:-1], u[1:m], axes=([0, 2], [0, 1]))
        known = dt * known
        u[m] = a_inv @ (u[m - 1] + h * (f[m - 1] - known))
        f[m] = -1j * eps @ u[m] - known - h * g[0] @ u[m]
    return u, f


def solve_u(eps, kernel: KernelTable, dt: float, t0: float = 0.0, tol: float = 1e-8) -> GreenFunctionU:
    """Implicit-trapezoidal Volterra solve of the Dyson equation (2nd order).

    The memory integral is the composite trapezoid rule; its u(t) endpoint
    enters the step implicitly and is solved exactly (the equation is
    linear). Block-diagonal problems are split and solved block by block.
    """
    eps = np.atleast_2d(np.asarray(eps, dtype=complex))
    n = len(kernel.times)
    d = eps.shape[0]
    if 6 * n * d * d * 16 > MEMORY_BUDGET:
        raise errors.MemoryBudgetExceeded("grid too large for the memory budget", n_times=n, dim=d)
    scale = max(np.abs(np.linalg.eigvalsh(eps)).max(initial=0.0), np.sqrt(np.linalg.norm(kernel.g[0], 2)))
    if dt * scale > 1.0:
        raise errors.StepTooLarge("dt too large for the system/kernel scale", dt=dt, max_stable_dt=1.0 / scale)

    u = np.zeros((n, d, d), dtype=complex)
    f = np.zeros_like(u)
    for blk in _blocks(eps, kernel):
        ix = np.ix_(range(n), blk, blk)
        e_b = eps[np.ix_(blk, blk)]
        g_b = kernel.g[ix]
        if len(blk) == 1:
            ub, fb = _solve_scalar(e_b[0, 0], g_b[:, 0, 0], dt, n)
            u[ix] = ub[:, None, None]
            f[ix] = fb[:, None, None]
        else:
            ub, fb = _solve_matrix(e_b, g_b, dt, n)
            u[ix] = ub
            f[ix] = fb

    out = GreenFunctionU(kernel.times + t0, u, f, dt, 0.0)
    norms = out.norms()
    if not np.all(np.isfinite(norms)) or norms.max() > 1.0 + 1e-3:
        raise errors.StepTooLarge("stability monitor tripped: |u| grew beyond 1", max_norm=float(np.nanmax(norms)))
    tail = norms[-max(1, n // 10):]
    return GreenFunctionU(out.times, u, f, dt, float(tail.mean()))


def _causal_convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """C_n = sum_{k<=n} x_k @ y_{n-k} for stacks of matrices (n, d, d)."""
    n, d, _ = x.shape
    out = np.zeros((n, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            for l in range(d):
                xl = x[:, i, l]
                yl = y[:, l, j]
                if not (xl.any() and yl.any()):
                    continue
                out[:, i, j] += signal.fftconvolve(xl, yl)[:n]
    return out


def accumulate_v(green: GreenFunctionU, kernel: KernelTable, tol: float = 1e-8, fermionic: bool = False) -> OccupationV:
    """Trapezoidal double convolution for v(t_n, t_n), O(N log N) overall.

    With the left-end weight w_0 = 1/2 the partial double sums obey
    T_n = T_{n-1} + row_n + row_n^dag - a_nn, where row_n = u_n C_n^dag and
    C_n = sum_k w_k u_k gt_{n-k} is a causal convolution. The right-end
    trapezoid correction is applied per n. The discrete quadratic form has
    a PSD kernel matrix, so v is PSD up to round-off.
    """
    u = green.u
    gt = kernel.gt
    n, d, _ = u.shape
    dt = green.dt
    wu = u.copy()
    wu[0] *= 0.5
    C = _causal_convolve(wu, gt)
    udag = np.conj(np.swapaxes(u, 1, 2))
    col = C @ udag  # sum_j w_j a_{jn}
    row = np.conj(np.swapaxes(col, 1, 2))
    diag = u @ gt[0] @ udag
    inc = row + col - diag
    inc[0] = 0.25 * diag[0]
    T = np.cumsum(inc, axis=0)
    v = dt * dt * (T - 0.5 * (row + col) + 0.25 * diag)
    v[0] = 0.0
    v = 0.5 * (v + np.conj(np.swapaxes(v, 1, 2)))

    lam = np.linalg.eigvalsh(v)
    lam_min = float(lam.min())
    scale = max(1.0, float(np.abs(lam).max()))
    if lam_min < -10 * tol * scale:
        raise errors.PositivityViolation("v lost positivity; refine the time grid", min_eigenvalue=lam_min)
    if fermionic and lam.max() > 1 + 10 * tol:
        raise errors.PositivityViolation("fermionic v exceeds the Pauli bound; refine the time grid", max_eigenvalue=float(lam.max()))
    return OccupationV(green.times, v, dt, lam_min)


def check_decay(green: GreenFunctionU, tol: float = 1e-2, window: float = 0.1,
                flat: float = 0.95) -> DecayStatus:
    """Classify the run from the late-time envelope of |u|.

    The mean norm over the last ``window`` fraction below ``tol`` means the
    system thermalized. Otherwise the envelope maxima over the last two
    windows are compared: a flat envelope (ratio >= ``flat``) points at a
    bound state, while one still falling means the grid is too short.
    """
    norms = green.norms()
    n = len(norms)
    k = max(4, int(n * window))
    late = norms[-k:]
    if late.mean() < tol:
        return DecayStatus.STEADY_REACHED
    first, second = norms[-2 * k:-k].max(), late.max()
    if second < flat * first:
        raise errors.GridTooShort(
            "|u| still decaying at t_max; extend the time grid",
            late_norm=float(late.mean()), envelope_ratio=float(second / first),
        )
    return DecayStatus.LOCALIZED_MODE_SUSPECTED


# -- binary dump --------------------------------------------------------------

_HEADER = struct.Struct("<QQd")


def dump_binary(path, green: GreenFunctionU, occ: OccupationV | None = None) -> None:
    """Little-endian dump: header (n_times u64, dim u64, dt f64), then u and
    (if given) v as row-major (n, dim, dim) complex128 pairs (re, im)."""
    n, d, _ = green.u.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(n, d, green.dt))
        fh.write(np.ascontiguousarray(green.u, dtype="<c16").tobytes())
        if occ is not None:
            fh.write(np.ascontiguousarray(occ.v, dtype="<c16").tobytes())


def load_binary(path):
    """Inverse of dump_binary: returns (dt, u, v or None)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    n, d, dt = _HEADER.unpack_from(raw)
    size = n * d * d * 16
    body = raw[_HEADER.size:]
    u = np.frombuffer(body[:size], dtype="<c16").reshape(n, d, d)
    v = np.frombuffer(body[size:2 * size], dtype="<c16").reshape(n, d, d) if len(body) >= 2 * size else None
    return dt, u, v
