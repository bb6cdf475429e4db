import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from thermoforge import quadrature
from thermoforge.errors import NonConvergence
from thermoforge.model import Lorentzian, Ohmic, ReservoirSpec, Statistics



def fourier_oracle_line(f, tau):
    """int_R f(e) exp(-i e tau) de with the oscillatory (QAWF) rule on both half lines."""
    if tau == 0:
        return integrate.quad(f, -np.inf, np.inf, limit=800, epsabs=1e-12)[0]
    kw = dict(weight="cos", wvar=tau, limlst=200)
    re = integrate.quad(f, 0, np.inf, **kw)[0] + integrate.quad(lambda e: f(-e), 0, np.inf, **kw)[0]
    kw["weight"] = "sin"
    im = -integrate.quad(f, 0, np.inf, **kw)[0] + integrate.quad(lambda e: f(-e), 0, np.inf, **kw)[0]
    return re + 1j * im


def fourier_oracle(f, lo, hi, tau):
    """int f(w) exp(-i w tau) dw by plain adaptive quadrature."""
    re = integrate.quad(lambda w: f(w) * math.cos(w * tau), lo, hi, limit=800, epsabs=1e-12, epsrel=1e-12)[0]
    im = integrate.quad(lambda w: -f(w) * math.sin(w * tau), lo, hi, limit=800, epsabs=1e-12, epsrel=1e-12)[0]
    return re + 1j * im


@pytest.mark.parametrize("tau", [0.0, 0.3, 1.7])
def test_ohmic_kernels_match_fourier_integral(tau):
    sd = Ohmic(0.1, 5.0)
    T = 2.0
    g = quadrature.ohmic_g(sd, tau)
    gt = quadrature.ohmic_gt(sd, T, tau)
    assert g == pytest.approx(fourier_oracle(lambda w: float(sd(w)), 0, 300, tau), rel=1e-8, abs=1e-10)
    nb = lambda w: float(sd(w)) / math.expm1(w / T) if w > 0 else sd.eta * T
    assert gt == pytest.approx(fourier_oracle(nb, 0, 300, tau), rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("tau", [0.0, 0.4, 2.5])
def test_lorentzian_kernels_match_fourier_integral(tau):
    sd = Lorentzian(0.7, 3.0)
    T, mu = 0.4, 0.5
    g = quadrature.lorentzian_g(sd, tau)
    assert g == pytest.approx(fourier_oracle_line(lambda e: float(sd(e)), tau), rel=1e-7, abs=1e-9)
    f = lambda e: float(sd(e)) * special.expit(-(e - mu) / T)
    gt = quadrature.lorentzian_gt(sd, T, mu, tau)
    assert gt == pytest.approx(fourier_oracle_line(f, tau), rel=1e-7, abs=1e-8)


def test_analytic_and_quadrature_kernels_agree():
    res = ReservoirSpec(Statistics.BOSONIC, 1.5, Ohmic(0.05, 4.0))
    tau = np.linspace(0, 3, 7)
    ga, gta = quadrature.reservoir_kernels(res, tau)
    gq, gtq = quadrature.reservoir_kernels(res, tau, method="quadrature")
    assert np.allclose(ga, gq, rtol=1e-7, atol=1e-9)
    assert np.allclose(gta, gtq, rtol=1e-7, atol=1e-9)


@given(st.floats(0.05, 50.0))
def test_trigamma_matches_polygamma(x):
    assert quadrature.trigamma(x) == pytest.approx(special.polygamma(1, x), rel=1e-10)


def test_memory_kernels_sum_reservoirs(lorentz_dot):
    times = np.linspace(0, 1, 5)
    k = quadrature.memory_kernels(lorentz_dot, times)
    g, gt = quadrature.reservoir_kernels(lorentz_dot.reservoirs[0], times)
    assert k.g.shape == (5, 1, 1)
    assert np.allclose(k.g[:, 0, 0], g) and np.allclose(k.gt[:, 0, 0], gt)
    tau, two = k.two_sided()
    assert np.allclose(two[::-1], np.conj(two)) and np.allclose(tau, -tau[::-1])


def test_principal_value_known_integrals():
    # P int_0^3 dx / (1 - x) = -ln 2
    val, _ = quadrature.principal_value(lambda x: 1.0, 1.0, (0.0, 3.0))
    assert val == pytest.approx(-math.log(2.0), abs=1e-10)
    # P int_-inf^inf exp(-x^2) / (p - x) dx = 2 sqrt(pi) Dawson(p)
    for p in (0.3, 1.2, -2.0):
        val, _ = quadrature.principal_value(lambda x: math.exp(-x * x), p)
        assert val == pytest.approx(2 * math.sqrt(math.pi) * special.dawsn(p), abs=1e-9)


def test_principal_value_endpoint_pole():
    with pytest.raises(NonConvergence):
        quadrature.principal_value(lambda x: 1.0, 0.0, (0.0, 1.0))
    val, _ = quadrature.principal_value(lambda x: x, 0.0, (0.0, 1.0))
    assert val == pytest.approx(-1.0)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1.5, 1.5))
def test_principal_value_is_linear(a, b, pole):
    f1 = lambda x: math.exp(-x * x)
    f2 = lambda x: 1.0 / (1.0 + x * x)
    dom = (-8.0, 8.0)
    lhs = quadrature.principal_value(lambda x: a * f1(x) + b * f2(x), pole, dom)[0]
    rhs = a * quadrature.principal_value(f1, pole, dom)[0] + b * quadrature.principal_value(f2, pole, dom)[0]
    assert lhs == pytest.approx(rhs, abs=1e-9)
