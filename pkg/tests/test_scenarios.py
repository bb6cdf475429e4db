import numpy as np
import pytest

from thermoforge import scenarios, thermo
from thermoforge.errors import ConfigError, LocalizedModePresent, UnsupportedCombination


def test_monitor_status():
    ms = [scenarios.Monitor("a", 1e-5, 1e-4), scenarios.Monitor("b", 2.0, 1.0), scenarios.Monitor("c", np.nan, 1.0)]
    assert scenarios.status_of(ms[:1]) == "ok"
    assert scenarios.status_of(ms) == "fail:b+c"


def test_set_point_is_consistent():
    res = scenarios.simulate(scenarios.set_config(1.0, dt=0.01, richardson=False))
    assert res.ok, res.status
    eps = np.real(np.diag(res.coeffs.eps_r_inf))
    n = np.real(np.diag(res.n_time))
    assert np.allclose(thermo.fermi(eps, res.fit_time.T, res.fit_time.mu), n, atol=1e-10)
    s = res.summary()
    assert s["status"] == "ok" and s["dim"] == 2 and len(s["n_freq"]) == 2


def test_richardson_tightens_cross_check():
    cfg = scenarios.ohmic_config(0.8, dt=0.02, richardson=False)
    plain = scenarios.simulate(cfg)
    rich = scenarios.simulate(scenarios.ohmic_config(0.8, dt=0.02, richardson=True))
    err = lambda r: abs(r.n_time[0, 0].real / r.report.n_inf[0, 0].real - 1)
    assert err(rich) < 0.2 * err(plain)


def test_bound_state_rejected():
    with pytest.raises(LocalizedModePresent) as info:
        scenarios.simulate(scenarios.ohmic_config(1.2, t_max=20.0))
    assert info.value.details["bound_state_frequency"] < 0
    with pytest.raises(LocalizedModePresent):
        scenarios.fig1(etas=[0.5, 1.5])


def test_fock_initial_state_path():
    cfg = scenarios.ohmic_config(0.3, dt=0.02, richardson=False)
    import dataclasses
    rho0 = np.diag([0.0, 1.0]).astype(complex)
    cfg = dataclasses.replace(cfg, system=dataclasses.replace(cfg.system, initial_fock=rho0, initial_occupation=None))
    res = scenarios.simulate(cfg)
    assert res.ok, res.status
    gauss = scenarios.simulate(scenarios.ohmic_config(0.3, n0=1.0, dt=0.02, richardson=False))
    assert res.n_time[0, 0].real == pytest.approx(gauss.n_time[0, 0].real, rel=1e-12)


def test_apply_parameter():
    cfg = scenarios.set_config(1.0)
    out = scenarios.apply_parameter(cfg, "gamma", 0.4)
    assert [r.spectral_density.gamma for r in out.system.reservoirs] == pytest.approx([0.2, 0.2])
    cfg = scenarios.ohmic_config(0.3)
    out = scenarios.apply_parameter(cfg, "eta_over_etac", 0.6)
    assert out.system.reservoirs[0].spectral_density.eta == pytest.approx(0.12)
    assert scenarios.apply_parameter(cfg, "T0", 3.0).system.reservoirs[0].temperature == 3.0
    with pytest.raises(UnsupportedCombination):
        scenarios.apply_parameter(cfg, "gamma", 0.1)
    with pytest.raises(ConfigError):
        scenarios.apply_parameter(cfg, "omega_c", 0.1)


def test_pool_map_preserves_order():
    assert scenarios.pool_map(abs, [-3, 2, -1], workers=2) == [3, 2, 1]


def test_t_max_for_tracks_decay():
    short = scenarios.t_max_for(scenarios.ohmic_mode(0.5))
    long = scenarios.t_max_for(scenarios.ohmic_mode(0.9))
    assert 20 <= short < long <= 2000
