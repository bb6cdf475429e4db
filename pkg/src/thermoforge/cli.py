"""Command line runner: named benchmarks, JSON scenarios and parameter sweeps.

Usage::

    thermoforge run fig1 [--out DIR] [--eta 0.3 0.5] [--override dt=0.005]
    thermoforge run fig3 --gamma-points 40
    thermoforge run scenario.json [--out DIR] [--override time_grid.dt=0.005]
    thermoforge sweep scenario.json --param eta_over_etac --min 0.05 --max 0.9 --points 18 [--log]
    thermoforge validate scenario.json

Exit codes: 0 success, 1 invariant failure (a monitor failed, a bound state
was found, or sweep points failed), 2 configuration error. Failures print
a JSON diagnostic on stderr.

Every CSV row carries a ``status`` column, "ok" or the failed monitors.
Floats are written with 12 significant digits, so identical inputs give
byte-identical files. THERMOFORGE_THREADS bounds the worker pool.

Named scenarios and their files:

* fig1 -> fig1a.csv {eta_over_etac, nbar_exact, nbar_bare_T0, nbar_ren_T0,
  nbar_ren_Tr}, fig1b.csv {eta_over_etac, omega_r_over_omega_s,
  Tr_over_T0}, fig1cd.csv {eta_over_etac, t, E, S}. Overrides: T0,
  omega_c, dt, etas, trajectory_etas.
* fig2 -> fig2.csv {eta_over_etac, T0, Tr, C_energy_route, C_gibbs_route}.
  Overrides: etas, omega_c, dt, points, span.
* fig3 -> fig3.csv {Gamma, eps_up_r, eps_dn_r, Tr, mu_r, n_up_exact, f_up,
  n_dn_exact, f_dn}. Overrides: gammas, points, dt.

Override values are parsed as JSON when possible (``etas=[0.2,0.4]``).

JSON scenario schema (``schema_version`` 1; energies in any unit, they are
rescaled by ``energy_scale``, default |eps_00|)::

    {
      "schema_version": 1,
      "name": "ohmic",
      "system": {
        "statistics": "bosonic" | "fermionic",
        "energy_matrix": [[1.0]]  or  {"real": [[...]], "imag": [[...]]},
        "initial_occupation": [[0.0]],          # Gaussian start, or
        "initial_fock": [[...]],                 # rho_lm of one mode
        "reservoirs": [{
          "temperature": 10.0,
          "chemical_potential": 0.0,             # must be 0 for bosons
          "coupling": "diagonal" | matrix,
          "spectral_density": {"kind": "ohmic", "eta_over_etac": 0.3, "omega_c": 5.0}
                           |  {"kind": "ohmic", "eta": 0.06, "omega_c": 5.0}
                           |  {"kind": "lorentzian", "gamma": 0.5, "d": 10.0}
        }]
      },
      "time_grid": {"t_max": 300.0, "dt": 0.01, "richardson": false},
      "frequency_grid": {"omega_min": -20, "omega_max": 20, "n_points": 401},
      "truncation": {"n_max": 60},
      "tolerances": {"steady_state_tol": 1e-2, "quadrature_tol": 1e-10,
                     "newton_tol": 1e-12, "solver_tol": 1e-8,
                     "u_floor": 1e-2, "closure_tol": 1e-4},
      "sweep": {"param": "eta_over_etac" | "gamma" | "T0",
                "min": 0.05, "max": 0.9, "points": 18, "scale": "linear" | "log"},
      "output": {"path": "out", "format": "csv"},
      "energy_scale": 1.0
    }

A JSON run writes trajectory.csv {t, E, S, N, T_r, mu_r, W, Q, W_c, F,
closure}, steady.csv {omega, delta_i, weight_i} and summary.json; a sweep
writes sweep.csv with one row per point. Sweeps keep per-point markers in
OUT/.points and resume from them when re-run with the same inputs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import errors, scenarios
from .model import SweepDescriptor, config_from_dict, config_to_dict, validate_scenario

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2
MAX_TRAJECTORY_ROWS = 4000


# -- formatting -----------------------------------------------------------------

def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    return obj


def write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _diagnostic(exc: Exception, code: Optional[str] = None) -> dict:
    if isinstance(exc, errors.ThermoforgeError):
        return {"error": exc.code, "message": str(exc), "details": jsonable(exc.as_dict())}
    return {"error": code or type(exc).__name__, "message": str(exc)}


def _fail(exc: Exception, exit_code: int) -> int:
    print(json.dumps(_diagnostic(exc), sort_keys=True), file=sys.stderr)
    return exit_code


# -- overrides ---------------------------------------------------------------------

def parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise errors.ConfigError(f"override {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_value(v.strip())
    return out


def apply_overrides(d: dict, overrides: dict) -> dict:
    """Set dotted keys (``time_grid.dt``) in a nested config dict."""
    d = json.loads(json.dumps(d))
    for key, value in overrides.items():
        node = d
        parts = key.split(".")
        for p in parts[:-1]:
            if isinstance(node, list):
                node = node[int(p)]
            else:
                node = node.setdefault(p, {})
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return d


def load_dict(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise errors.ConfigError(f"no such scenario or file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise errors.ConfigError(f"invalid JSON in {path}: {exc}") from exc


def build_config(d: dict):
    try:
        return config_from_dict(d)
    except errors.ThermoforgeError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise errors.ConfigError(f"malformed scenario: {exc!r}") from exc


# -- named scenarios -------------------------------------------------------------

_NAMED_KWARGS = {
    "fig1": {"T0", "omega_c", "dt", "etas", "trajectory_etas"},
    "fig2": {"etas", "omega_c", "dt", "points", "span"},
    "fig3": {"gammas", "points", "dt"},
}


def run_named(name: str, out: Path, overrides: dict, eta=None, gamma_points=None) -> int:
    kwargs = dict(overrides)
    unknown = set(kwargs) - _NAMED_KWARGS[name]
    if unknown:
        raise errors.ConfigError(f"unknown override(s) for {name}: {sorted(unknown)}")
    if eta:
        if name not in ("fig1", "fig2"):
            raise errors.ConfigError("--eta applies to fig1 and fig2")
        kwargs["etas"] = list(eta)
    if gamma_points is not None:
        if name != "fig3":
            raise errors.ConfigError("--gamma-points applies to fig3")
        kwargs["points"] = gamma_points
    result = scenarios.NAMED[name](**kwargs)
    for fname, (cols, rows) in result["tables"].items():
        write_csv(out / f"{fname}.csv", cols, rows)
    write_json(out / "summary.json", {"scenario": name, "ok": result["ok"], "parameters": kwargs,
                                      "points": result["points"]})
    return EXIT_OK if result["ok"] else EXIT_INVARIANT


def run_config(path: str, out: Path, overrides: dict) -> int:
    d = apply_overrides(load_dict(path), overrides)
    cfg = build_config(d)
    res = scenarios.simulate(cfg)
    tr = res.trajectory
    stride = max(1, math.ceil(len(tr.times) / MAX_TRAJECTORY_ROWS))
    cols = ["t", "E", "S", "N", "T_r", "mu_r", "W", "Q", "W_c", "F", "closure", "status"]
    rows = []
    for k in range(0, len(tr.times), stride):
        rows.append({"t": tr.times[k], "E": tr.E[k], "S": tr.S[k], "N": tr.N[k], "T_r": tr.T[k],
                     "mu_r": tr.mu[k], "W": tr.W[k], "Q": tr.Q[k], "W_c": tr.Wc[k], "F": tr.F[k],
                     "closure": tr.closure[k], "status": res.status})
    write_csv(out / "trajectory.csv", cols, rows)
    if res.report is not None:
        rep = res.report
        dim = rep.delta.shape[-1]
        scols = ["omega"] + [f"delta_{i}" for i in range(dim)] + [f"weight_{i}" for i in range(dim)] + ["status"]
        srows = []
        for k, w in enumerate(rep.omega):
            r = {"omega": w, "status": res.status}
            for i in range(dim):
                r[f"delta_{i}"] = rep.delta[k, i]
                r[f"weight_{i}"] = rep.weight[k, i]
            srows.append(r)
        write_csv(out / "steady.csv", scols, srows)
    summary = res.summary()
    summary["point"] = scenarios.point_row(res)
    write_json(out / "summary.json", summary)
    return EXIT_OK if res.ok else EXIT_INVARIANT


# -- sweeps ------------------------------------------------------------------------

def _sweep_point(args) -> dict:
    cfg_dict, param, value = args
    try:
        cfg = scenarios.apply_parameter(build_config(cfg_dict), param, value)
        res = scenarios.simulate(cfg)
        return scenarios.point_row(res)
    except errors.ThermoforgeError as exc:
        return {"status": f"error:{exc.code}", "error": jsonable(exc.as_dict())}


def run_sweep(path: str, out: Path, sweep: SweepDescriptor, overrides: dict, workers: Optional[int] = None) -> int:
    d = apply_overrides(load_dict(path), overrides)
    d.pop("sweep", None)
    cfg = build_config(d)
    probe = dataclasses.replace(cfg, sweep=sweep)
    validate_scenario(probe)  # raises on a malformed descriptor or system
    values = sweep.values()
    marker_dir = out / ".points"
    marker_dir.mkdir(parents=True, exist_ok=True)
    key = hashlib.sha256(json.dumps([d, sweep.param, [fmt(v) for v in values]], sort_keys=True).encode()).hexdigest()
    manifest = marker_dir / "manifest.json"
    if manifest.exists() and json.loads(manifest.read_text()).get("key") != key:
        for f in marker_dir.glob("point_*.json"):
            f.unlink()
    manifest.write_text(json.dumps({"key": key}) + "\n")

    rows: dict = {}
    todo = []
    for i, v in enumerate(values):
        f = marker_dir / f"point_{i:05d}.json"
        if f.exists():
            rows[i] = json.loads(f.read_text())
        else:
            todo.append(i)
    args = [(d, sweep.param, float(values[i])) for i in todo]
    for i, row in zip(todo, scenarios.pool_map(_sweep_point, args, workers)):
        row = jsonable(row)
        tmp = marker_dir / f"point_{i:05d}.json.tmp"
        tmp.write_text(json.dumps(row, sort_keys=True) + "\n")
        os.replace(tmp, marker_dir / f"point_{i:05d}.json")
        rows[i] = row

    cols = ["index", sweep.param] + scenarios.point_columns(cfg.system.dim)
    table = []
    failed = []
    for i, v in enumerate(values):
        r = dict(rows[i])
        r["index"] = i
        r[sweep.param] = float(v)
        table.append(r)
        if r.get("status") != "ok":
            failed.append({"index": i, sweep.param: float(v), "status": r.get("status"), "error": r.get("error")})
    write_csv(out / "sweep.csv", cols, table)
    summary = {"param": sweep.param, "points": len(values), "failed": failed, "ok": not failed}
    write_json(out / "summary.json", summary)
    if failed:
        exc = errors.PartialFailure(f"{len(failed)} of {len(values)} sweep points failed", failed=failed)
        return _fail(exc, EXIT_INVARIANT)
    return EXIT_OK


# -- validate ----------------------------------------------------------------------

def run_validate(path: str) -> int:
    cfg = validate_scenario(build_config(load_dict(path)))
    print(json.dumps({"valid": True, "normalized": jsonable(config_to_dict(cfg)),
                      "physical_energy_scale": cfg.physical_energy_scale}, indent=2, sort_keys=True))
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermoforge", description="Exact open-system thermodynamics at strong coupling.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a named scenario (fig1, fig2, fig3) or a JSON scenario file")
    r.add_argument("scenario")
    r.add_argument("--out", default="out")
    r.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--eta", type=float, nargs="+", help="eta / eta_c values (fig1, fig2)")
    r.add_argument("--gamma-points", type=int, help="number of Gamma values (fig3)")

    s = sub.add_parser("sweep", help="sweep one parameter of a JSON scenario")
    s.add_argument("config")
    s.add_argument("--param")
    s.add_argument("--min", type=float)
    s.add_argument("--max", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--log", action="store_true")
    s.add_argument("--out", default="out")
    s.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    v = sub.add_parser("validate", help="check a JSON scenario and print it in internal units")
    v.add_argument("config")
    return p


def _sweep_descriptor(args, path) -> SweepDescriptor:
    base = load_dict(path).get("sweep") or {}
    param = args.param or base.get("param")
    lo = args.min if args.min is not None else base.get("min")
    hi = args.max if args.max is not None else base.get("max")
    pts = args.points if args.points is not None else base.get("points")
    if None in (param, lo, hi, pts):
        raise errors.ConfigError("sweep needs --param, --min, --max and --points (or a sweep section)")
    scale = "log" if args.log else base.get("scale", "linear")
    return SweepDescriptor(str(param), float(lo), float(hi), int(pts), scale)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            overrides = parse_overrides(args.override)
            out = Path(args.out)
            if args.scenario in scenarios.NAMED:
                return run_named(args.scenario, out, overrides, args.eta, args.gamma_points)
            if args.eta or args.gamma_points is not None:
                raise errors.ConfigError("--eta and --gamma-points apply to named scenarios only")
            return run_config(args.scenario, out, overrides)
        if args.command == "sweep":
            return run_sweep(args.config, Path(args.out), _sweep_descriptor(args, args.config),
                             parse_overrides(args.override))
        return run_validate(args.config)
    except errors.ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except errors.ThermoforgeError as exc:
        return _fail(exc, EXIT_INVARIANT)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
