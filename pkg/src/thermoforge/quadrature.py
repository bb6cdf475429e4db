"""Spectral densities, occupation functions, memory kernels and PV integrals.

The memory kernels are

    g(tau)  = int J(w) exp(-i w tau) dw
    gt(tau) = int J(w) f(w) exp(-i w tau) dw

with f the Bose-Einstein or Fermi-Dirac occupation of the reservoir. Closed
forms are used for both supported spectral families; adaptive quadrature is
kept as an independent route for verification and as a fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import errors
from .model import Lorentzian, Ohmic, ReservoirSpec, Statistics, SystemSpec

# Exponent beyond which a Matsubara term is dropped (exp(-40) ~ 4e-18).
_MATSUBARA_CUTOFF = 40.0
_MATSUBARA_BLOCK = 2048


def eval_J(model, w):
    """Spectral density J(w); raises OutOfSupport outside the model's support."""
    w_arr = np.asarray(w, dtype=float)
    lo, hi = model.support
    if np.any(w_arr < lo) or np.any(w_arr > hi):
        raise errors.OutOfSupport(f"{model.kind} density is defined on [{lo}, {hi}]", omega=float(np.min(w_arr)))
    return model(w_arr)


def occupation_fn(stat: Statistics, e, T: float, mu: float = 0.0):
    """Bose-Einstein or Fermi-Dirac occupation 1 / (exp((e - mu)/T) -+ 1).

    T = 0 is taken as a limit: bosons give 0 above mu, fermions a step
    with value 1/2 at e = mu.
    """
    e = np.asarray(e, dtype=float)
    x = e - mu
    if stat is Statistics.BOSONIC:
        if np.any(x <= 0):
            raise errors.BosonicBelowMu("bosonic occupation needs e > mu", e=float(np.min(e)), mu=mu)
        if T == 0:
            return np.zeros_like(x)
        y = x / T
        with np.errstate(over="ignore"):
            return np.exp(-y) / -np.expm1(-y)
    if T == 0:
        return np.where(x < 0, 1.0, np.where(x > 0, 0.0, 0.5))
    return special.expit(-x / T)


def _jf_scalar(res: ReservoirSpec, w):
    """J(w) f(w) for one reservoir, with the bosonic w -> 0 limit filled in."""
    w = np.asarray(w, dtype=float)
    sd = res.spectral_density
    T = res.temperature
    if res.statistics is Statistics.FERMIONIC:
        return sd(w) * occupation_fn(Statistics.FERMIONIC, w, T, res.chemical_potential)
    if T == 0:
        return np.zeros_like(w)
    if isinstance(sd, Ohmic):
        # eta w e^{-w/wc} / (e^{w/T} - 1) -> eta T as w -> 0
        y = np.maximum(w, 0.0) / T
        small = y < 1e-8
        ysafe = np.where(small, 1.0, y)
        with np.errstate(over="ignore"):
            ratio = np.where(small, 1.0 - y / 2, ysafe * np.exp(-ysafe) / -np.expm1(-ysafe))
        return np.where(w >= 0, sd.eta * T * ratio * np.exp(-np.maximum(w, 0.0) / sd.omega_c), 0.0)
    return sd(w) * occupation_fn(Statistics.BOSONIC, w, T, res.chemical_potential)


# -- special functions --------------------------------------------------------

_TRIGAMMA_ASYMPTOTIC = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def trigamma(z):
    """Complex trigamma psi'(z) for Re z > 0 (recurrence + asymptotic series)."""
    shape = np.shape(z)
    z = np.array(z, dtype=complex, ndmin=1).ravel()
    acc = np.zeros_like(z)
    shift = np.maximum(0, np.ceil(12.0 - z.real)).astype(int)
    for k in range(int(shift.max(initial=0))):
        m = shift > k
        zk = z[m] + k
        acc[m] += 1.0 / (zk * zk)
    z = z + shift
    iz = 1.0 / z
    iz2 = iz * iz
    series = 0.0
    for c in reversed(_TRIGAMMA_ASYMPTOTIC):
        series = c + iz2 * series
    return (acc + iz + 0.5 * iz2 + iz * iz2 * series).reshape(shape)


# -- memory kernels -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KernelTable:
    """g(tau_k) and gt(tau_k) on tau_k >= 0, shape (n, dim, dim).

    Negative lags follow from g(-tau) = g(tau)^dag.
    """

    times: np.ndarray
    g: np.ndarray
    gt: np.ndarray
    provenance: str = "analytic"

    @property
    def dim(self) -> int:
        return self.g.shape[1]

    def two_sided(self, which: str = "g"):
        """Kernel on the symmetric lag grid -tau_max..tau_max."""
        k = getattr(self, which)
        neg = np.conj(np.swapaxes(k[:0:-1], 1, 2))
        return np.concatenate([-self.times[:0:-1], self.times]), np.concatenate([neg, k])


def ohmic_g(model: Ohmic, tau):
    tau = np.asarray(tau, dtype=float)
    return model.eta * model.omega_c**2 / (1.0 + 1j * model.omega_c * tau) ** 2


def ohmic_gt(model: Ohmic, T: float, tau):
    """eta T^2 psi'(1 + T/omega_c + i T tau), the thermal Ohmic kernel."""
    tau = np.asarray(tau, dtype=float)
    if T == 0:
        return np.zeros(tau.shape, dtype=complex)
    return model.eta * T**2 * trigamma(1.0 + T / model.omega_c + 1j * T * tau.ravel()).reshape(tau.shape)


def lorentzian_g(model: Lorentzian, tau):
    tau = np.asarray(tau, dtype=float)
    return (math.pi * model.gamma * model.d * np.exp(-model.d * np.abs(tau))).astype(complex)


def _fermi_complex(z, T, mu):
    x = (z - mu) / T
    if x.real > 0:
        e = np.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (np.exp(x) + 1.0)


def lorentzian_gt(model: Lorentzian, T: float, mu: float, tau):
    """Fermionic Lorentzian kernel by residues in the lower half plane.

    One Lorentzian pole at -i d plus the Matsubara poles mu - i w_n; the
    tau = 0 value (a slowly converging series) is taken by quadrature.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("lorentzian_gt expects tau >= 0")
    if T == 0:
        res = ReservoirSpec(Statistics.FERMIONIC, 0.0, model, mu)
        return _gt_quadrature(res, tau)
    G, d = model.gamma, model.d
    denom = np.exp((-1j * d - mu) / T) + 1.0 if (-mu / T) < 700 else np.inf
    if abs(denom) < 1e-8:
        res = ReservoirSpec(Statistics.FERMIONIC, T, model, mu)
        return _gt_quadrature(res, tau)
    out = math.pi * G * d * _fermi_complex(-1j * d, T, mu) * np.exp(-d * tau).astype(complex)

    flat = tau.ravel()
    pos = flat > 0
    tp = flat[pos]
    acc = np.zeros(tp.shape, dtype=complex)
    n0 = 0
    while True:
        w0 = (2 * n0 + 1) * math.pi * T
        active = w0 * tp < _MATSUBARA_CUTOFF
        if not active.any():
            break
        n = np.arange(n0, n0 + _MATSUBARA_BLOCK)
        wn = (2 * n + 1) * math.pi * T
        z = mu - 1j * wn
        Jz = G * d * d / (z * z + d * d)
        ta = tp[active]
        acc[active] += np.exp(-np.outer(ta, wn)) @ Jz
        n0 += _MATSUBARA_BLOCK
    series = np.zeros(flat.shape, dtype=complex)
    series[pos] = 2j * math.pi * T * np.exp(-1j * mu * tp) * acc
    out = out.ravel() + series
    if np.any(~pos):
        res = ReservoirSpec(Statistics.FERMIONIC, T, model, mu)
        out[~pos] = _gt_quadrature(res, np.zeros(int((~pos).sum())))
    return out.reshape(tau.shape)


def _fourier_quadrature(h, lo, tau, tol):
    """int_lo^inf h(w) exp(-i w tau) dw for tau >= 0, scalar."""
    kw = dict(limit=400, epsabs=tol, epsrel=tol)
    if tau == 0:
        val, err = integrate.quad(h, lo, np.inf, **kw)
        return complex(val), err
    # shift to [0, inf) for the Fourier weight
    hs = lambda x: h(x + lo)
    c, ec = integrate.quad(hs, 0, np.inf, weight="cos", wvar=tau, limlst=200)
    s, es = integrate.quad(hs, 0, np.inf, weight="sin", wvar=tau, limlst=200)
    phase = np.exp(-1j * lo * tau)
    return phase * (c - 1j * s), abs(ec) + abs(es)


def _kernel_quadrature(h, support, tau, tol):
    lo, hi = support
    out = np.empty(len(tau), dtype=complex)
    worst = 0.0
    for k, t in enumerate(tau):
        if np.isfinite(lo):
            val, err = _fourier_quadrature(h, lo, t, tol)
        else:
            # (-inf, 0] folded onto [0, inf); real h makes it the conjugate
            right, e1 = _fourier_quadrature(h, 0.0, t, tol)
            left, e2 = _fourier_quadrature(lambda x: h(-x), 0.0, t, tol)
            val, err = right + np.conj(left), e1 + e2
        out[k] = val
        worst = max(worst, err)
    if worst > 1e3 * max(tol, 1e-12) * max(1.0, np.max(np.abs(out))):
        raise errors.QuadratureNonConvergence("kernel quadrature did not converge", error_estimate=worst)
    return out


def _g_quadrature(res: ReservoirSpec, tau, tol=1e-11):
    sd = res.spectral_density
    h = lambda w: float(sd(w))
    return _kernel_quadrature(h, sd.support, np.asarray(tau, dtype=float).ravel(), tol)


def _gt_quadrature(res: ReservoirSpec, tau, tol=1e-11):
    sd = res.spectral_density
    h = lambda w: float(_jf_scalar(res, w))
    return _kernel_quadrature(h, sd.support, np.asarray(tau, dtype=float).ravel(), tol)


def reservoir_kernels(res: ReservoirSpec, tau, method: str = "analytic"):
    """Scalar (g, gt) of one reservoir on lags tau >= 0."""
    tau = np.asarray(tau, dtype=float)
    sd = res.spectral_density
    if method == "quadrature":
        return _g_quadrature(res, tau), _gt_quadrature(res, tau)
    if isinstance(sd, Ohmic):
        return ohmic_g(sd, tau), ohmic_gt(sd, res.temperature, tau)
    if isinstance(sd, Lorentzian):
        return lorentzian_g(sd, tau), lorentzian_gt(sd, res.temperature, res.chemical_potential, tau)
    raise errors.UnsupportedCombination(f"no kernel for {sd!r}")


def memory_kernels(system: SystemSpec, times, method: str = "analytic") -> KernelTable:
    """Total kernels g, gt summed over reservoirs on the lag grid ``times``."""
    times = np.asarray(times, dtype=float)
    dim = system.dim
    g = np.zeros((len(times), dim, dim), dtype=complex)
    gt = np.zeros_like(g)
    for res in system.reservoirs:
        c = res.coupling_matrix(dim)
        gs, gts = reservoir_kernels(res, times, method)
        g += gs[:, None, None] * c
        gt += gts[:, None, None] * c
    return KernelTable(times, g, gt, provenance=method)


# -- principal value ------------------------------------------------------------

def principal_value(f, pole: float, domain=(-np.inf, np.inf), tol: float = 1e-11, window: float | None = None):
    """P int_domain f(x) / (pole - x) dx by singularity subtraction.

    Around the pole the symmetric window [pole - h, pole + h] is folded,
    int_0^h [f(pole - s) - f(pole + s)] / s ds, so f(pole) cancels exactly;
    the rest of the domain is an ordinary integral. A pole outside the
    domain gives an ordinary integral. Returns (value, error_estimate).
    """
    a, b = domain
    kw = dict(limit=400, epsabs=tol, epsrel=tol)
    f1 = lambda x: float(f(x))

    def plain(lo, hi):
        if hi <= lo:
            return 0.0, 0.0
        pts = None
        if np.isfinite(lo) and np.isfinite(hi) and lo < pole < hi:
            pts = [pole]
        if pts:
            return integrate.quad(lambda x: f1(x) / (pole - x), lo, hi, points=pts, **kw)
        return integrate.quad(lambda x: f1(x) / (pole - x), lo, hi, **kw)

    if not (a < pole < b):
        if pole == a or pole == b:
            fp = f1(pole)
            if abs(fp) > 0:
                raise errors.NonConvergence("PV at a domain endpoint diverges unless f(pole) = 0", pole=pole)
            # removable: treat as an ordinary integral
            val, err = integrate.quad(lambda x: f1(x) / (pole - x) if x != pole else 0.0, a, b, **kw)
            return val, err
        return plain(a, b)

    h_default = window if window is not None else max(1.0, abs(pole))
    h = min(h_default, pole - a, b - pole)
    core, e_core = integrate.quad(lambda s: (f1(pole - s) - f1(pole + s)) / s, 0.0, h, **kw)
    left, e_left = plain(a, pole - h)
    right, e_right = plain(pole + h, b)
    err = e_core + e_left + e_right
    val = core + left + right
    if not np.isfinite(val):
        raise errors.NonConvergence("principal value integral diverged", pole=pole)
    return val, err
