"""Frequency-domain steady state: level shift, broadening, occupations, bound states.

With Delta(w) = P int J(w') / (w - w') dw' the stationary resolvent is

    U(w) = [w - eps - Delta(w) + i pi J(w)]^-1

and the steady occupation is int U(w) Jf(w) U(w)^dag dw, Jf = sum_a J_a f_a.
For one level this is int rho_w(w) f(w) dw with the normalized weight

    rho_w(w) = J(w) / ([w - eps - Delta(w)]^2 + pi^2 J(w)^2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize, special

from . import errors
from .model import Lorentzian, Ohmic, Statistics, SystemSpec
from .quadrature import _jf_scalar, principal_value

_ASYMPTOTIC_TERMS = np.array([math.factorial(k) for k in range(21)], dtype=float)


def _exp_ei(x):
    """exp(-x) Ei(x) for real x != 0, overflow-free."""
    x = np.asarray(x, dtype=float)
    big = np.abs(x) > 50
    xs = np.where(big, 1.0, x)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.exp(-xs) * special.expi(xs)
    xb = np.where(big, x, 50.0)
    powers = xb[..., None] ** -(np.arange(21) + 1.0)
    asym = powers @ _ASYMPTOTIC_TERMS
    return np.where(big, asym, direct)


def model_shift(model, w):
    """Closed-form level shift P int J(w')/(w - w') dw' of one spectral family."""
    w = np.asarray(w, dtype=float)
    if isinstance(model, Ohmic):
        wc = model.omega_c
        x = w / wc
        nz = x != 0
        term = np.where(nz, w * _exp_ei(np.where(nz, x, 1.0)), 0.0)
        return model.eta * (-wc + term)
    if isinstance(model, Lorentzian):
        return math.pi * model.gamma * model.d * w / (w * w + model.d**2)
    raise errors.UnsupportedCombination(f"no level shift for {model!r}")


def model_shift_pv(model, w, tol: float = 1e-11):
    """Level shift by principal-value quadrature (independent route)."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.empty_like(w)
    for k, wk in enumerate(w):
        out[k], _ = principal_value(lambda x: float(model(x)), wk, model.support, tol=tol)
    return out


def level_shift_delta(system: SystemSpec, w, method: str = "analytic") -> np.ndarray:
    """Matrix level shift Delta(w), shape w.shape + (d, d)."""
    w = np.asarray(w, dtype=float)
    d = system.dim
    out = np.zeros(w.shape + (d, d), dtype=complex)
    for r in system.reservoirs:
        s = model_shift(r.spectral_density, w) if method == "analytic" else model_shift_pv(r.spectral_density, w).reshape(w.shape)
        out = out + np.asarray(s)[..., None, None] * r.coupling_matrix(d)
    return out


def support_of(system: SystemSpec):
    if not system.reservoirs:
        return None
    lo = min(r.spectral_density.support[0] for r in system.reservoirs)
    hi = max(r.spectral_density.support[1] for r in system.reservoirs)
    return lo, hi


def _is_diagonal(system: SystemSpec) -> bool:
    def diag(m):
        return np.allclose(m, np.diag(np.diag(m)), rtol=0, atol=0)
    return diag(system.energy_matrix) and all(diag(r.coupling_matrix(system.dim)) for r in system.reservoirs)


# -- bound states ---------------------------------------------------------------

class ModeStatus(enum.Enum):
    NONE = "None"
    BOUND_STATE = "BoundState"
    UNCOUPLED = "Uncoupled"


@dataclass(frozen=True)
class LocalizedMode:
    status: ModeStatus
    frequency: Optional[float] = None

    @property
    def exists(self) -> bool:
        return self.status is not ModeStatus.NONE


def localized_mode_exists(system: SystemSpec) -> LocalizedMode:
    """Search for a root of det[w - eps - Delta(w)] below the band edge.

    Each eigenvalue branch of w - eps - Delta(w) increases with slope >= 1
    below the band, so a bound state exists iff the largest eigenvalue is
    positive at the edge; the outermost root is returned.
    """
    if not system.reservoirs or all(r.spectral_density.total_weight == 0 for r in system.reservoirs):
        return LocalizedMode(ModeStatus.UNCOUPLED)
    lo, hi = support_of(system)
    if not np.isfinite(lo):
        # the continuum covers the real line; J > 0 everywhere
        return LocalizedMode(ModeStatus.NONE)
    eps = system.energy_matrix

    def branch(w):
        m = w * np.eye(system.dim) - eps - level_shift_delta(system, w)
        return np.linalg.eigvalsh(0.5 * (m + m.conj().T)).max()

    edge = branch(lo)
    if edge <= 0:
        return LocalizedMode(ModeStatus.NONE)
    a = lo - 1.0
    while branch(a) > 0:
        a = lo - 2 * (lo - a)
    root = optimize.brentq(branch, a, lo, xtol=1e-14, rtol=1e-14)
    return LocalizedMode(ModeStatus.BOUND_STATE, float(root))


# -- resonances and weights ---------------------------------------------------

def _scalar_J(system: SystemSpec, i: int, w):
    w = np.asarray(w, dtype=float)
    return sum(r.coupling_matrix(system.dim)[i, i].real * r.spectral_density(w) for r in system.reservoirs)


def _scalar_Jf(system: SystemSpec, i: int, w):
    w = np.asarray(w, dtype=float)
    return sum(r.coupling_matrix(system.dim)[i, i].real * _jf_scalar(r, w) for r in system.reservoirs)


def _scalar_shift(system: SystemSpec, i: int, w):
    w = np.asarray(w, dtype=float)
    return sum(r.coupling_matrix(system.dim)[i, i].real * model_shift(r.spectral_density, w) for r in system.reservoirs)


def resonances(system: SystemSpec, i: int = 0) -> np.ndarray:
    """Real roots of w - eps_ii - Delta_ii(w) inside the band."""
    lo, hi = support_of(system)
    e = system.energy_matrix[i, i].real
    reach = 4.0 * (abs(e) + abs(float(_scalar_shift(system, i, e))) + 1.0)
    a = max(lo, e - reach) if np.isfinite(lo) else e - reach
    b = e + reach
    grid = np.linspace(a, b, 4001)
    if np.isfinite(lo):
        grid = grid[grid > lo]
    h = grid - e - _scalar_shift(system, i, grid)
    roots = []
    for k in np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]:
        f = lambda w: w - e - float(_scalar_shift(system, i, w))
        roots.append(optimize.brentq(f, grid[k], grid[k + 1], xtol=1e-14))
    return np.array(roots)


def spectral_weight(system: SystemSpec, w, i: int = 0):
    """Normalized single-level weight rho_w(w) (level i of a diagonal system)."""
    w = np.asarray(w, dtype=float)
    J = _scalar_J(system, i, w)
    det = (w - system.energy_matrix[i, i].real - _scalar_shift(system, i, w)) ** 2 + (math.pi * J) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(J > 0, J / det, 0.0)


def _intervals(system: SystemSpec, i: int):
    """Integration pieces for level i: finite windows around resonances."""
    lo, hi = support_of(system)
    pts = []
    for r in resonances(system, i):
        width = max(math.pi * float(_scalar_J(system, i, r)), 1e-9)
        pts += [r - 60 * width, r - 5 * width, r, r + 5 * width, r + 60 * width]
    e = system.energy_matrix[i, i].real
    pts += [e]
    for res in system.reservoirs:
        pts += [res.chemical_potential]
        sd = res.spectral_density
        scale = sd.omega_c if isinstance(sd, Ohmic) else sd.d
        pts += [-scale, scale]
    pts = sorted(p for p in set(pts) if lo < p < hi)
    finite_lo = lo if np.isfinite(lo) else (min(pts) - 50.0 if pts else -50.0)
    finite_hi = max(pts) + 50.0 if pts else 50.0
    for res in system.reservoirs:
        sd = res.spectral_density
        if isinstance(sd, Ohmic):
            finite_hi = max(finite_hi, 80 * sd.omega_c)
    edges = [finite_lo] + [p for p in pts if finite_lo < p < finite_hi] + [finite_hi]
    pieces = list(zip(edges[:-1], edges[1:]))
    tails = []
    if not np.isfinite(lo):
        tails.append((-np.inf, finite_lo))
    tails.append((finite_hi, np.inf))
    return pieces, tails


def _integrate_level(system, i, integrand, tol):
    pieces, tails = _intervals(system, i)
    total, err = 0.0, 0.0
    for a, b in pieces + tails:
        val, e = integrate.quad(lambda w: float(integrand(w)), a, b, limit=500, epsabs=tol, epsrel=tol)
        total += val
        err += e
    return total, err


def steady_occupation(system: SystemSpec, tol: float = 1e-10, check_modes: bool = True):
    """Steady occupation matrix N(inf) and an error estimate.

    Raises LocalizedModePresent when a bound state exists: the frequency
    integral then misses the undamped part of the dynamics.
    """
    if check_modes:
        mode = localized_mode_exists(system)
        if mode.status is ModeStatus.BOUND_STATE:
            raise errors.LocalizedModePresent("bound state below the band", bound_state_frequency=mode.frequency)
        if mode.status is ModeStatus.UNCOUPLED:
            raise errors.LocalizedModePresent("system is uncoupled; no steady state", bound_state_frequency=None)
    d = system.dim
    if _is_diagonal(system):
        out = np.zeros((d, d), dtype=complex)
        err = 0.0
        for i in range(d):
            e = system.energy_matrix[i, i].real

            def integrand(w, i=i, e=e):
                J = _scalar_J(system, i, w)
                if J <= 0:
                    return 0.0
                den = (w - e - _scalar_shift(system, i, w)) ** 2 + (math.pi * J) ** 2
                return _scalar_Jf(system, i, w) / den

            out[i, i], ei = _integrate_level(system, i, integrand, tol)
            err = max(err, ei)
        return out, err
    return _steady_matrix(system, tol)


def _resolvent(system, w):
    d = system.dim
    J = system.total_J(w)
    return np.linalg.inv(w * np.eye(d) - system.energy_matrix - level_shift_delta(system, w) + 1j * math.pi * J)


def _steady_matrix(system: SystemSpec, tol: float):
    d = system.dim

    def f(w):
        U = _resolvent(system, w)
        Jf = sum(r.coupling_matrix(d) * float(_jf_scalar(r, w)) for r in system.reservoirs)
        m = U @ Jf @ U.conj().T
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    total = np.zeros(2 * d * d)
    err = 0.0
    seen = set()
    for i in range(d):
        pieces, tails = _intervals(system, i)
        for a, b in pieces + tails:
            seen.add((a, b))
    edges = sorted({x for ab in seen for x in ab})
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = integrate.quad_vec(f, a, b, epsabs=tol, epsrel=tol, limit=2000)
        total += val
        err = max(err, float(e))
    m = total[: d * d].reshape(d, d) + 1j * total[d * d:].reshape(d, d)
    return 0.5 * (m + m.conj().T), err


def sum_rule(system: SystemSpec, tol: float = 1e-10) -> np.ndarray:
    """int U J U^dag dw; the identity when no bound state exists."""
    d = system.dim
    if _is_diagonal(system):
        out = np.zeros(d)
        for i in range(d):
            out[i], _ = _integrate_level(system, i, lambda w, i=i: float(spectral_weight(system, w, i)), tol)
        return np.diag(out).astype(complex)

    def f(w):
        U = _resolvent(system, w)
        m = U @ system.total_J(w) @ U.conj().T
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    lo, hi = support_of(system)
    val, _ = integrate.quad_vec(f, lo, hi, epsabs=tol, epsrel=tol, limit=2000)
    return val[: d * d].reshape(d, d) + 1j * val[d * d:].reshape(d, d)


# -- report ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SteadyStateReport:
    n_inf: np.ndarray
    eps_r: np.ndarray
    T_r: float
    mu_r: float
    omega: np.ndarray
    delta: np.ndarray
    weight: np.ndarray
    localized_mode: LocalizedMode
    sum_rule: np.ndarray
    error_estimate: float
    fit_residual: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def sum_rule_deviation(self) -> float:
        return float(np.abs(self.sum_rule - np.eye(self.sum_rule.shape[0])).max())


def steady_state_report(system: SystemSpec, omega=None, eps_r=None, tol: float = 1e-10) -> SteadyStateReport:
    """Full frequency-domain picture; ``eps_r`` defaults to the resonances."""
    from .thermo import renorm_temperature_mu  # local: thermo imports steady

    mode = localized_mode_exists(system)
    if mode.status is not ModeStatus.NONE:
        raise errors.LocalizedModePresent(f"no unique steady state ({mode.status.value})", bound_state_frequency=mode.frequency)
    n_inf, err = steady_occupation(system, tol, check_modes=False)
    if eps_r is None:
        eps_r = np.diag([_nearest_resonance(system, i) for i in range(system.dim)]).astype(complex)
    try:
        fit = renorm_temperature_mu(eps_r, n_inf, system.statistics)
        T_r, mu_r, resid = fit.T, fit.mu, fit.residual
    except errors.DegenerateSystem:
        # one fermionic level: (T, mu) is not determined by one occupation
        T_r = mu_r = resid = math.nan
    omega = np.linspace(-20, 20, 401) if omega is None else np.asarray(omega, dtype=float)
    delta = np.real(np.diagonal(level_shift_delta(system, omega), axis1=-2, axis2=-1))
    weight = np.stack([spectral_weight(system, omega, i) for i in range(system.dim)], axis=-1)
    return SteadyStateReport(
        n_inf=n_inf, eps_r=eps_r, T_r=T_r, mu_r=mu_r,
        omega=omega, delta=delta, weight=weight, localized_mode=mode,
        sum_rule=sum_rule(system, tol), error_estimate=err, fit_residual=resid,
    )


def _nearest_resonance(system, i):
    roots = resonances(system, i)
    e = system.energy_matrix[i, i].real
    if roots.size == 0:
        return e
    return float(roots[np.argmin(np.abs(roots - e))])


# -- helpers for sweeps ---------------------------------------------------------

def decay_rate_estimate(system: SystemSpec) -> float:
    """Slowest pole decay rate pi J(w_r) / (1 - Delta'(w_r)) over the levels.

    A quasi-particle estimate used to size time grids; where the slope
    factor is not positive the bare golden-rule rate pi J(eps) is used.
    """
    rates = []
    for i in range(system.dim):
        w0 = _nearest_resonance(system, i)
        J = float(_scalar_J(system, i, w0))
        h = 1e-5 * max(1.0, abs(w0))
        slope = float(_scalar_shift(system, i, w0 + h) - _scalar_shift(system, i, w0 - h)) / (2 * h)
        z = 1.0 - slope
        rates.append(math.pi * J / z if z > 0.1 else math.pi * J)
    return float(min(rates))


def _panels(edges, per):
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            out += list(np.linspace(a, b, per + 1)[:-1])
    out.append(edges[-1])
    return np.array(out)


def thermal_occupation_table(system: SystemSpec, T0, order: int = 20) -> np.ndarray:
    """nbar(T0) = int rho_w(w) n_BE(w, T0) dw for many bath temperatures.

    One bosonic mode with an Ohmic bath. rho_w does not depend on T0, so it
    is tabulated once on composite Gauss-Legendre panels (geometric towards
    w -> 0, refined around the resonance) and every T0 costs one weighted
    sum.
    """
    if system.dim != 1 or system.statistics is not Statistics.BOSONIC:
        raise errors.UnsupportedCombination("thermal table needs one bosonic mode")
    sds = [r.spectral_density for r in system.reservoirs]
    if not sds or not all(isinstance(sd, Ohmic) for sd in sds):
        raise errors.UnsupportedCombination("thermal table needs Ohmic reservoirs")
    wc = max(sd.omega_c for sd in sds)
    res = _nearest_resonance(system, 0)
    width = max(math.pi * float(_scalar_J(system, 0, res)), 1e-9)
    near = [res - 60 * width, res - 5 * width, res - width, res, res + width, res + 5 * width, res + 60 * width]
    near = [x for x in near if x > 0]
    lo_end = near[0] if near else 0.5 * res
    low = np.geomspace(1e-10, lo_end, int(6 * np.log10(lo_end / 1e-10)) + 2)
    high = np.geomspace(near[-1] if near else lo_end, 80 * wc, 60)
    edges = np.unique(np.concatenate([low, _panels(near, 4) if near else [], high]))
    x, wts = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * wts).ravel()
    rho = spectral_weight(system, nodes, 0) * weights
    T0 = np.atleast_1d(np.asarray(T0, dtype=float))
    with np.errstate(over="ignore"):
        nb = 1.0 / np.expm1(nodes[None, :] / T0[:, None])
    return nb @ rho
