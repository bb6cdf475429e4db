import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thermoforge import model
from thermoforge.errors import ConfigError, ScenarioValidationError
from thermoforge.model import (Lorentzian, Ohmic, ReservoirSpec, ScenarioConfig, Statistics, SystemSpec, TimeGrid,
                               config_from_dict, config_to_dict, validate_scenario)

BASE = {
    "schema_version": 1,
    "system": {
        "statistics": "fermionic",
        "energy_matrix": [[1.0, 0.0], [0.0, 3.0]],
        "reservoirs": [{"temperature": 3.0, "chemical_potential": 5.0,
                        "spectral_density": {"kind": "lorentzian", "gamma": 0.5, "d": 10.0}}],
    },
    "time_grid": {"t_max": 10.0, "dt": 0.01},
}


def issues(d):
    with pytest.raises(ScenarioValidationError) as info:
        validate_scenario(config_from_dict(d))
    return {i.code for i in info.value.issues}


def mutate(path, value):
    d = json.loads(json.dumps(BASE))
    node = d
    for k in path[:-1]:
        node = node[k]
    node[path[-1]] = value
    return d


def test_round_trip_dict():
    cfg = config_from_dict(BASE)
    again = config_from_dict(json.loads(json.dumps(config_to_dict(cfg))))
    assert np.array_equal(again.system.energy_matrix, cfg.system.energy_matrix)
    assert again.time_grid == cfg.time_grid


def test_validation_issues():
    assert "NonHermitianEnergyMatrix" in issues(mutate(["system", "energy_matrix"], [[1.0, 0.5], [0.0, 3.0]]))
    assert "BadGrid" in issues(mutate(["time_grid", "dt"], -0.1))
    bad_n0 = mutate(["system", "initial_occupation"], [[1.5, 0.0], [0.0, 0.0]])
    assert "FermionOccupationOutOfRange" in issues(bad_n0)


def test_bosonic_mu_rejected():
    d = mutate(["system", "statistics"], "bosonic")
    d["system"]["energy_matrix"] = [[1.0]]
    d["system"]["reservoirs"][0]["spectral_density"] = {"kind": "ohmic", "eta": 0.1, "omega_c": 5.0}
    assert "BosonicNonzeroMu" in issues(d)


def test_unknown_kind():
    with pytest.raises(ConfigError):
        model.spectral_density_from_dict({"kind": "gaussian"})


def test_eta_over_etac():
    sd = model.spectral_density_from_dict({"kind": "ohmic", "eta_over_etac": 0.5, "omega_c": 5.0}, omega_s=1.0)
    assert sd.eta == pytest.approx(0.1)


@given(st.floats(0.1, 10.0))
def test_normalization_is_scale_free(s):
    res = ReservoirSpec(Statistics.FERMIONIC, 2.0 * s, Lorentzian(0.5 * s, 10.0 * s), chemical_potential=s)
    sys_ = SystemSpec(np.array([[s]], dtype=complex), Statistics.FERMIONIC, (res,))
    cfg = validate_scenario(ScenarioConfig(sys_, TimeGrid(10.0 / s, 0.01 / s)))
    assert cfg.normalized
    assert cfg.system.energy_matrix[0, 0] == pytest.approx(1.0)
    r = cfg.system.reservoirs[0]
    assert (r.temperature, r.chemical_potential) == pytest.approx((2.0, 1.0))
    assert (r.spectral_density.gamma, r.spectral_density.d) == pytest.approx((0.5, 10.0))
    assert cfg.time_grid.dt == pytest.approx(0.01)
    back = model.to_physical(cfg)
    assert back.system.energy_matrix[0, 0] == pytest.approx(s)


def test_spectral_densities():
    o = Ohmic(0.2, 5.0)
    assert o(-1.0) == 0.0 and o(5.0) == pytest.approx(0.2 * 5 * np.exp(-1))
    l = Lorentzian(0.5, 2.0)
    assert l(0.0) == pytest.approx(0.5)
    assert model.critical_eta(1.0, 5.0) == pytest.approx(0.2)
