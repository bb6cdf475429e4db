import csv
import json
import tempfile
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from thermoforge import cli

SMALL = {
    "schema_version": 1,
    "name": "small",
    "system": {
        "statistics": "fermionic",
        "energy_matrix": [[1.0, 0.0], [0.0, 3.0]],
        "reservoirs": [
            {"temperature": 3.0, "chemical_potential": 5.0, "spectral_density": {"kind": "lorentzian", "gamma": 0.5, "d": 10.0}},
            {"temperature": 0.1, "chemical_potential": 2.0, "spectral_density": {"kind": "lorentzian", "gamma": 0.5, "d": 10.0}},
        ],
    },
    "time_grid": {"t_max": 30.0, "dt": 0.01, "richardson": True},
    "tolerances": {"u_floor": 1e-12},
}


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "small.json"
    p.write_text(json.dumps(SMALL))
    return p


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_run_config_outputs(scenario, tmp_path):
    out = tmp_path / "o"
    assert cli.main(["run", str(scenario), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "ok"
    rows = read_rows(out / "trajectory.csv")
    assert rows[0].keys() >= {"t", "E", "S", "T_r", "mu_r", "W", "Q", "W_c", "closure", "status"}
    assert (out / "steady.csv").exists()


def test_run_is_deterministic(scenario, tmp_path):
    for name in ("a", "b"):
        assert cli.main(["run", str(scenario), "--out", str(tmp_path / name)]) == 0
    for f in ("trajectory.csv", "steady.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_config_errors_exit_2(scenario, tmp_path, capsys):
    assert cli.main(["run", str(scenario), "--out", str(tmp_path / "x"), "--override", "time_grid.dt=-1"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ScenarioValidationError"
    assert cli.main(["validate", str(tmp_path / "missing.json")]) == 2


def test_bound_state_exits_1(tmp_path, capsys):
    assert cli.main(["run", "fig1", "--eta", "1.5", "--out", str(tmp_path)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "LocalizedModePresent" and err["details"]["bound_state_frequency"] < 0


def test_validate_prints_internal_units(scenario, capsys):
    assert cli.main(["validate", str(scenario)]) == 0
    out = json.loads(capsys.readouterr().out)
    em = out["normalized"]["system"]["energy_matrix"]
    em = em["real"] if isinstance(em, dict) else em
    assert em == [[1.0, 0.0], [0.0, 3.0]]


def test_sweep_resume(scenario, tmp_path):
    out = tmp_path / "s"
    args = ["sweep", str(scenario), "--param", "gamma", "--min", "0.5", "--max", "1.5", "--points", "3", "--out", str(out)]
    assert cli.main(args) == 0
    first = (out / "sweep.csv").read_bytes()
    rows = read_rows(out / "sweep.csv")
    assert [float(r["gamma"]) for r in rows] == [0.5, 1.0, 1.5]
    assert all(r["status"] == "ok" for r in rows)
    marker = out / ".points" / "point_00001.json"
    marker.unlink()
    assert cli.main(args) == 0
    assert marker.exists() and (out / "sweep.csv").read_bytes() == first


def test_overrides():
    assert cli.parse_overrides(["a.b=2", "c=[1,2]", "d=x"]) == {"a.b": 2, "c": [1, 2], "d": "x"}
    d = cli.apply_overrides({"a": {"b": 1}, "l": [{"x": 1}]}, {"a.b": 3, "l.0.x": 5})
    assert d == {"a": {"b": 3}, "l": [{"x": 5}]}


rows_st = st.lists(st.fixed_dictionaries({
    "x": st.floats(allow_nan=False, allow_infinity=False, width=64),
    "n": st.integers(-10**6, 10**6),
    "status": st.sampled_from(["ok", "fail:closure"]),
}), max_size=20)


@given(rows_st)
def test_csv_is_deterministic_and_round_trips(rows):
    with tempfile.TemporaryDirectory() as tmp:
        check_csv(Path(tmp), rows)


def check_csv(d, rows):
    cli.write_csv(d / "a.csv", ["x", "n", "status"], rows)
    cli.write_csv(d / "b.csv", ["x", "n", "status"], rows)
    assert (d / "a.csv").read_bytes() == (d / "b.csv").read_bytes()
    back = read_rows(d / "a.csv")
    for r, b in zip(rows, back):
        assert float(b["x"]) == pytest.approx(r["x"], rel=1e-11, abs=0)
        assert int(b["n"]) == r["n"] and b["status"] == r["status"]
