"""End-to-end pipeline and the three named benchmark scenarios.

``simulate`` runs one scenario through kernels, u, v, renormalized
coefficients, the thermodynamic trajectory and the frequency-domain oracle,
and collects invariant monitors. ``fig1``, ``fig2`` and ``fig3`` build the
benchmark tables:

* fig1: one Ohmic mode (omega_c = 5 omega_s, T0 = 10 omega_s, vacuum start)
  across eta / eta_c, comparing the exact steady occupation with
  Bose-Einstein forms at bare and renormalized parameters;
* fig2: specific heat at eta / eta_c in {0.01, 0.5, 0.8} by two routes;
* fig3: the two-lead quantum dot (eps_dn = 3 eps_up, T_LR = (3, 0.1),
  mu_LR = (5, 2), d = 10, Gamma_L = Gamma_R = Gamma / 2) across Gamma.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import errors, greens, quadrature, renorm, state, steady, thermo
from .model import (
    FrequencyGrid,
    Lorentzian,
    Ohmic,
    ReservoirSpec,
    ScenarioConfig,
    Statistics,
    SystemSpec,
    TimeGrid,
    Tolerances,
    critical_eta,
    validate_scenario,
)

CROSS_CHECK_TOL = 1e-3
FIT_RESIDUAL_TOL = 1e-10
SUM_RULE_TOL = 1e-4


@dataclass(frozen=True)
class Monitor:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.threshold)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": float(self.value), "threshold": self.threshold, "passed": self.passed}


def status_of(monitors: Sequence[Monitor]) -> str:
    bad = [m.name for m in monitors if not m.passed]
    return "ok" if not bad else "fail:" + "+".join(bad)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    config: ScenarioConfig
    green: greens.GreenFunctionU
    occ: greens.OccupationV
    coeffs: renorm.RenormCoefficients
    trajectory: thermo.ThermoTrajectory
    decay: Optional[greens.DecayStatus]
    n_time: np.ndarray  # occupation at t_max
    fit_time: thermo.GibbsFit  # Gibbs fit of n_time at eps_r(inf)
    report: Optional[steady.SteadyStateReport]
    monitors: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return status_of(self.monitors)

    @property
    def ok(self) -> bool:
        return all(m.passed for m in self.monitors)

    def summary(self) -> dict:
        d = self.green.dim
        out = {
            "name": self.config.name,
            "status": self.status,
            "monitors": [m.to_dict() for m in self.monitors],
            "late_norm_u": self.green.late_norm,
            "decay": self.decay.value if self.decay else "GridTooShort",
            "eps_r_inf": np.real(np.diag(self.coeffs.eps_r_inf)).tolist(),
            "gamma_inf": np.real(np.diag(self.coeffs.gamma_inf)).tolist(),
            "last_reliable_time": self.coeffs.last_reliable_time,
            "n_time": np.real(np.diag(self.n_time)).tolist(),
            "n_time_unextrapolated": np.real(np.diag(self.extras.get("n_raw", self.n_time))).tolist(),
            "richardson": self.config.time_grid.richardson,
            "T_r": self.fit_time.T,
            "mu_r": self.fit_time.mu,
            "fit_residual": self.fit_time.residual,
            "closure": self.trajectory.relative_closure,
            "bookkeeping_start_time": float(self.trajectory.times[self.trajectory.start]),
            "min_eigenvalue_v": self.occ.min_eigenvalue,
        }
        if self.report is not None:
            out["n_freq"] = np.real(np.diag(self.report.n_inf)).tolist()
            out["sum_rule"] = np.real(np.diag(self.report.sum_rule)).tolist()
            out["freq_error_estimate"] = self.report.error_estimate
        out["dim"] = d
        return out


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


def simulate(config: ScenarioConfig, frequency_domain: bool = True) -> SimulationResult:
    """Run one scenario; raises LocalizedModePresent above a bound-state threshold.

    The work/heat bookkeeping and all monitors use the validated (internal
    unit) scenario.
    """
    cfg = validate_scenario(config)
    system = cfg.system
    tol = cfg.tolerances
    if system.reservoirs:
        mode = steady.localized_mode_exists(system)
        if mode.status is steady.ModeStatus.BOUND_STATE:
            raise errors.LocalizedModePresent(
                "bound state below the band: no unique steady state", bound_state_frequency=mode.frequency)
    times = cfg.time_grid.times
    kernel = quadrature.memory_kernels(system, times)
    green = greens.solve_u(system.energy_matrix, kernel, cfg.time_grid.dt, tol=tol.solver_tol)
    fermionic = system.statistics is Statistics.FERMIONIC
    occ = greens.accumulate_v(green, kernel, tol=tol.solver_tol, fermionic=fermionic)
    try:
        decay = greens.check_decay(green, tol=tol.steady_state_tol)
    except errors.GridTooShort:
        decay = None
    coeffs = renorm.renorm_coefficients(green, occ, u_floor=tol.u_floor)

    T_res = max([r.temperature for r in system.reservoirs], default=0.0)
    if system.initial_fock is not None:
        traj = _fock_trajectory(system, green, occ, coeffs, times)
    else:
        n = thermo.occupation_trajectory(green.u, occ.v, system.initial_n())
        T_end = thermo.fit_series(coeffs.eps_r[-1:], n[-1:], system.statistics)[0][0]
        T_ref = max(T_res, abs(T_end) if np.isfinite(T_end) else 0.0, 1e-12)
        traj = thermo.thermo_trajectory(times, coeffs.eps_r, n, system.statistics, T_ref=T_ref)
    n_time = traj.n[-1]
    n_raw = n_time
    if cfg.time_grid.richardson:
        n_time = _richardson(system, kernel, green, occ, tol.solver_tol, fermionic)
    fit_time = thermo.renorm_temperature_mu(coeffs.eps_r_inf, n_time, system.statistics, tol=tol.newton_tol)

    monitors = [
        Monitor("decay", green.late_norm if decay is not None else math.inf, tol.steady_state_tol),
        Monitor("closure", traj.relative_closure, tol.closure_tol),
        Monitor("fit_residual", fit_time.residual, FIT_RESIDUAL_TOL),
    ]
    report = None
    if frequency_domain and system.reservoirs:
        report = steady.steady_state_report(system, omega=cfg.frequency_grid.points,
                                            eps_r=coeffs.eps_r_inf, tol=tol.quadrature_tol)
        monitors.append(Monitor("cross_check", _rel(np.diag(n_time), np.diag(report.n_inf)), CROSS_CHECK_TOL))
        monitors.append(Monitor("sum_rule", report.sum_rule_deviation, SUM_RULE_TOL))
    return SimulationResult(cfg, green, occ, coeffs, traj, decay, n_time, fit_time, report, monitors,
                            extras={"n_raw": n_raw})


def _richardson(system, kernel, green, occ, tol, fermionic):
    """(4 N(dt) - N(2 dt)) / 3 at the last time shared by both grids."""
    m = (len(green.times) - 1) // 2 * 2
    coarse = quadrature.KernelTable(kernel.times[: m + 1 : 2], kernel.g[: m + 1 : 2], kernel.gt[: m + 1 : 2],
                                    kernel.provenance)
    g2 = greens.solve_u(system.energy_matrix, coarse, 2 * green.dt, tol=tol)
    o2 = greens.accumulate_v(g2, coarse, tol=tol, fermionic=fermionic)
    n0 = system.initial_n()
    fine = thermo.occupation_trajectory(green.u[m:m + 1], occ.v[m:m + 1], n0)[0]
    crude = thermo.occupation_trajectory(g2.u[-1:], o2.v[-1:], n0)[0]
    return (4.0 * fine - crude) / 3.0


def _fock_trajectory(system, green, occ, coeffs, times, stride: int = 10):
    """Entropy from explicit density matrices on every ``stride``-th point."""
    rho0 = system.initial_fock
    idx, rhos = state.fock_trajectory(rho0, green.u[:, 0, 0], occ.v[:, 0, 0], stride=stride)
    n = thermo.occupation_trajectory(green.u[idx], occ.v[idx], system.initial_n())
    S = np.array([r.entropy() for r in rhos])
    return thermo.thermo_trajectory(times[idx], coeffs.eps_r[idx], n, system.statistics, S=S)


# -- scenario constructors -----------------------------------------------------

def t_max_for(system: SystemSpec, lifetimes: float = 12.0, lo: float = 20.0, hi: float = 2000.0) -> float:
    """Grid length covering ``lifetimes`` decay times of the slowest pole."""
    rate = steady.decay_rate_estimate(system)
    return float(np.clip(lifetimes / rate, lo, hi)) if rate > 0 else hi


def ohmic_mode(eta_over_etac: float, T0: float = 10.0, omega_c: float = 5.0, n0: float = 0.0,
               omega_s: float = 1.0) -> SystemSpec:
    eta = eta_over_etac * critical_eta(omega_s, omega_c)
    res = ReservoirSpec(Statistics.BOSONIC, T0, Ohmic(eta, omega_c))
    return SystemSpec(np.array([[omega_s]], dtype=complex), Statistics.BOSONIC, (res,),
                      initial_occupation=np.array([[n0]], dtype=complex))


def set_dot(gamma: float, eps_up: float = 1.0, eps_dn: float = 3.0, T=(3.0, 0.1), mu=(5.0, 2.0),
            d: float = 10.0) -> SystemSpec:
    """Quantum dot between two leads with Gamma_L = Gamma_R = gamma / 2."""
    leads = tuple(
        ReservoirSpec(Statistics.FERMIONIC, t, Lorentzian(gamma / 2, d), chemical_potential=m)
        for t, m in zip(T, mu)
    )
    return SystemSpec(np.diag([eps_up, eps_dn]).astype(complex), Statistics.FERMIONIC, leads,
                      initial_occupation=np.zeros((2, 2), dtype=complex))


def ohmic_config(eta_over_etac: float, T0: float = 10.0, omega_c: float = 5.0, n0: float = 0.0,
                 dt: float = 0.01, t_max: Optional[float] = None, richardson: bool = True) -> ScenarioConfig:
    system = ohmic_mode(eta_over_etac, T0, omega_c, n0)
    t_max = t_max_for(system) if t_max is None else t_max
    t_max = 2 * dt * math.ceil(t_max / (2 * dt))
    return ScenarioConfig(system, TimeGrid(t_max, dt, richardson), FrequencyGrid(0.0, 3 * omega_c, 301),
                          name=f"ohmic_eta{eta_over_etac:g}")


def set_config(gamma: float, dt: float = 0.005, t_max: Optional[float] = None,
               richardson: bool = True) -> ScenarioConfig:
    system = set_dot(gamma)
    t_max = t_max_for(system, lifetimes=15.0) if t_max is None else t_max
    t_max = 2 * dt * math.ceil(t_max / (2 * dt))
    # pure-pole decay: M = -udot/u stays accurate down to tiny |u|
    tol = Tolerances(u_floor=1e-12)
    return ScenarioConfig(system, TimeGrid(t_max, dt, richardson), FrequencyGrid(-20.0, 20.0, 401), tolerances=tol,
                          name=f"set_gamma{gamma:g}")


# -- worker pool --------------------------------------------------------------

def worker_count() -> int:
    env = os.environ.get("THERMOFORGE_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def pool_map(fn: Callable, items: Sequence, workers: Optional[int] = None) -> list:
    """Order-preserving map over a bounded process pool (serial for one worker)."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def _error_row(exc: Exception) -> dict:
    if isinstance(exc, errors.ThermoforgeError):
        return {"status": f"error:{exc.code}", "error": exc.as_dict()}
    raise exc


# -- fig1 -----------------------------------------------------------------------

FIG1_ETAS = tuple(round(0.1 * k, 1) for k in range(1, 10))
FIG1_TRAJECTORY_ETAS = (0.3, 0.5, 0.8)


def _fig1_point(args) -> dict:
    frac, T0, omega_c, dt, keep_traj = args
    try:
        res = simulate(ohmic_config(frac, T0, omega_c, dt=dt))
    except errors.ThermoforgeError as exc:
        row = _error_row(exc)
        row["eta_over_etac"] = frac
        return row
    w_r = float(res.coeffs.eps_r_inf[0, 0].real)
    n_exact = float(res.n_time[0, 0].real)
    Tr = res.fit_time.T
    row = {
        "eta_over_etac": frac,
        "nbar_exact": n_exact,
        "nbar_freq": float(res.report.n_inf[0, 0].real),
        "nbar_bare_T0": float(thermo.bose(1.0, T0)),
        "nbar_ren_T0": float(thermo.bose(w_r, T0)),
        "nbar_ren_Tr": float(thermo.bose(w_r, Tr)),
        "omega_r_over_omega_s": w_r,
        "Tr_over_T0": Tr / T0,
        "status": res.status,
        "summary": res.summary(),
    }
    if keep_traj:
        tr = res.trajectory
        stride = max(1, len(tr.times) // 2000)
        row["traj"] = (tr.times[::stride], tr.E[::stride], tr.S[::stride])
    return row


def fig1(etas: Sequence[float] = FIG1_ETAS, T0: float = 10.0, omega_c: float = 5.0, dt: float = 0.01,
         trajectory_etas: Sequence[float] = FIG1_TRAJECTORY_ETAS, workers: Optional[int] = None) -> dict:
    """Tables for the distribution identity, omega_r / T_r, and E(t), S(t)."""
    for frac in etas:
        mode = steady.localized_mode_exists(ohmic_mode(frac, T0, omega_c))
        if mode.status is steady.ModeStatus.BOUND_STATE:
            raise errors.LocalizedModePresent(
                f"eta/eta_c = {frac:g} is above the bound-state threshold",
                eta_over_etac=frac, bound_state_frequency=mode.frequency)
    keep = [any(abs(frac - e) < 1e-12 for e in trajectory_etas) for frac in etas]
    rows = pool_map(_fig1_point, [(f, T0, omega_c, dt, k) for f, k in zip(etas, keep)], workers)
    fig1a, fig1b, fig1cd = [], [], []
    for r in rows:
        st = r["status"]
        if "nbar_exact" not in r:
            fig1a.append({"eta_over_etac": r["eta_over_etac"], "status": st})
            fig1b.append({"eta_over_etac": r["eta_over_etac"], "status": st})
            continue
        fig1a.append({k: r[k] for k in ("eta_over_etac", "nbar_exact", "nbar_bare_T0", "nbar_ren_T0", "nbar_ren_Tr")} | {"status": st})
        fig1b.append({k: r[k] for k in ("eta_over_etac", "omega_r_over_omega_s", "Tr_over_T0")} | {"status": st})
        if "traj" in r:
            for t, E, S in zip(*r["traj"]):
                fig1cd.append({"eta_over_etac": r["eta_over_etac"], "t": t, "E": E, "S": S, "status": st})
    return {
        "tables": {
            "fig1a": (["eta_over_etac", "nbar_exact", "nbar_bare_T0", "nbar_ren_T0", "nbar_ren_Tr", "status"], fig1a),
            "fig1b": (["eta_over_etac", "omega_r_over_omega_s", "Tr_over_T0", "status"], fig1b),
            "fig1cd": (["eta_over_etac", "t", "E", "S", "status"], fig1cd),
        },
        "points": [{k: v for k, v in r.items() if k != "traj"} for r in rows],
        "ok": all(r["status"] == "ok" for r in rows),
    }


# -- fig2 ---------------------------------------------------------------------

FIG2_ETAS = (0.01, 0.5, 0.8)


def renormalized_frequency(frac: float, omega_c: float = 5.0, dt: float = 0.01,
                           t_max: Optional[float] = None) -> tuple:
    """omega_r(inf) of one Ohmic mode from the time-domain solution.

    Only u is needed, and u does not depend on the bath temperature. The
    grid covers the shorter of 12 lifetimes and 400 omega_s^-1, enough for
    the plateau of -udot/u.
    """
    system = ohmic_mode(frac, 1.0, omega_c)
    if t_max is None:
        t_max = min(t_max_for(system), 400.0)
    times = np.arange(int(round(t_max / dt)) + 1) * dt
    kernel = quadrature.memory_kernels(system, times)
    green = greens.solve_u(system.energy_matrix, kernel, dt)
    coeffs = renorm.renorm_coefficients(green, None)
    return float(coeffs.eps_r_inf[0, 0].real), coeffs


def _fig2_point(args) -> dict:
    frac, omega_c, dt, points, span = args
    w_r, _ = renormalized_frequency(frac, omega_c, dt)
    system = ohmic_mode(frac, 1.0, omega_c)
    table = lambda T0: steady.thermal_occupation_table(system, T0)

    def T0_for(Tr_target):
        n_target = float(thermo.bose(w_r, Tr_target))
        f = lambda lt: math.log(table(math.exp(lt))[0]) - math.log(n_target)
        from scipy.optimize import brentq
        return math.exp(brentq(f, math.log(1e-6), math.log(1e4), xtol=1e-14))

    lo, hi = T0_for(w_r / span ** 0.5), T0_for(w_r * span ** 0.5)
    # pad by one grid step on each side so the interior covers the span
    T0 = np.geomspace(lo, hi, points)
    step = T0[1] / T0[0]
    T0 = np.geomspace(lo / step, hi * step, points + 2)
    nbar = table(T0)
    check = [float(steady.steady_occupation(dataclasses.replace(
        system, reservoirs=(dataclasses.replace(system.reservoirs[0], temperature=t),)), tol=1e-12)[0][0, 0].real)
        for t in (T0[0], T0[-1])]
    table_err = max(abs(nbar[0] / check[0] - 1), abs(nbar[-1] / check[1] - 1))
    try:
        sh = thermo.specific_heat(T0, nbar, w_r)
    except errors.NonMonotoneTr as exc:
        row = _error_row(exc)
        row["eta_over_etac"] = frac
        return row
    rel = sh.max_relative_disagreement
    monitors = [Monitor("route_agreement", rel, 1e-3), Monitor("thermal_table", table_err, 1e-6)]
    return {
        "eta_over_etac": frac,
        "omega_r": w_r,
        "heat": sh,
        "max_relative_disagreement": rel,
        "low_T_exponent": sh.low_T_exponent,
        "Tr_span": float(sh.Tr[-1] / sh.Tr[0]),
        "thermal_table_error": table_err,
        "status": status_of(monitors),
        "monitors": [m.to_dict() for m in monitors],
    }


def fig2(etas: Sequence[float] = FIG2_ETAS, omega_c: float = 5.0, dt: float = 0.01, points: int = 1200,
         span: float = 100.0, workers: Optional[int] = None) -> dict:
    """Specific heat by both routes over a T_r grid spanning ``span``.

    The grid is centred on T_r = omega_r, i.e. omega_r / T_r runs over
    [span^-1/2, span^1/2].
    """
    rows = pool_map(_fig2_point, [(f, omega_c, dt, points, span) for f in etas], workers)
    table = []
    for r in rows:
        if "heat" not in r:
            table.append({"eta_over_etac": r["eta_over_etac"], "status": r["status"]})
            continue
        sh = r["heat"]
        for T0, Tr, ca, cb in zip(sh.T0, sh.Tr, sh.C_energy, sh.C_gibbs):
            table.append({"eta_over_etac": r["eta_over_etac"], "T0": T0, "Tr": Tr,
                          "C_energy_route": ca, "C_gibbs_route": cb, "status": r["status"]})
    points_out = [{k: v for k, v in r.items() if k != "heat"} for r in rows]
    return {
        "tables": {"fig2": (["eta_over_etac", "T0", "Tr", "C_energy_route", "C_gibbs_route", "status"], table)},
        "points": points_out,
        "ok": all(r["status"] == "ok" for r in rows),
    }


# -- fig3 ---------------------------------------------------------------------

def fig3_gammas(points: int = 20, lo: float = 0.1, hi: float = 2.0) -> np.ndarray:
    return np.linspace(lo, hi, points)


def _fig3_point(args) -> dict:
    gamma, dt = args
    try:
        res = simulate(set_config(gamma, dt=dt))
    except errors.ThermoforgeError as exc:
        row = _error_row(exc)
        row["Gamma"] = gamma
        return row
    eps = np.real(np.diag(res.coeffs.eps_r_inf))
    n = np.real(np.diag(res.n_time))
    fit = res.fit_time
    f = thermo.fermi(eps, fit.T, fit.mu)
    return {
        "Gamma": gamma,
        "eps_up_r": eps[0], "eps_dn_r": eps[1],
        "Tr": fit.T, "mu_r": fit.mu,
        "n_up_exact": n[0], "f_up": f[0],
        "n_dn_exact": n[1], "f_dn": f[1],
        "n_freq": np.real(np.diag(res.report.n_inf)).tolist(),
        "status": res.status,
        "summary": res.summary(),
    }


FIG3_COLUMNS = ["Gamma", "eps_up_r", "eps_dn_r", "Tr", "mu_r", "n_up_exact", "f_up", "n_dn_exact", "f_dn", "status"]


def fig3(gammas: Optional[Sequence[float]] = None, points: int = 20, dt: float = 0.005,
         workers: Optional[int] = None) -> dict:
    gammas = fig3_gammas(points) if gammas is None else np.asarray(gammas, dtype=float)
    rows = pool_map(_fig3_point, [(float(g), dt) for g in gammas], workers)
    table = [{k: r.get(k) for k in FIG3_COLUMNS if k in r} for r in rows]
    return {
        "tables": {"fig3": (FIG3_COLUMNS, table)},
        "points": rows,
        "ok": all(r["status"] == "ok" for r in rows),
    }


NAMED = {"fig1": fig1, "fig2": fig2, "fig3": fig3}


# -- parameter sweeps -----------------------------------------------------------

def apply_parameter(config: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    """Set one sweep parameter on every matching reservoir of ``config``.

    eta_over_etac rescales Ohmic couplings (eta_c = omega_s / omega_c with
    omega_s = eps_00); gamma sets the total Lorentzian width, split in the
    existing ratio between reservoirs; T0 sets every reservoir temperature.
    """
    system = config.system
    res = list(system.reservoirs)
    if param == "eta_over_etac":
        omega_s = abs(system.energy_matrix[0, 0].real)
        hits = [i for i, r in enumerate(res) if isinstance(r.spectral_density, Ohmic)]
        for i in hits:
            wc = res[i].spectral_density.omega_c
            res[i] = dataclasses.replace(res[i], spectral_density=Ohmic(value * critical_eta(omega_s, wc), wc))
    elif param == "gamma":
        hits = [i for i, r in enumerate(res) if isinstance(r.spectral_density, Lorentzian)]
        total = sum(res[i].spectral_density.gamma for i in hits)
        for i in hits:
            sd = res[i].spectral_density
            share = sd.gamma / total if total > 0 else 1.0 / len(hits)
            res[i] = dataclasses.replace(res[i], spectral_density=Lorentzian(value * share, sd.d))
    elif param == "T0":
        hits = list(range(len(res)))
        res = [dataclasses.replace(r, temperature=value) for r in res]
    else:
        raise errors.ConfigError(f"unknown sweep parameter {param!r}")
    if not hits:
        raise errors.UnsupportedCombination(f"no reservoir takes the parameter {param!r}")
    return dataclasses.replace(config, system=dataclasses.replace(system, reservoirs=tuple(res)))


def point_row(result: SimulationResult) -> dict:
    """Flat per-level record of one simulation (sweep and run output)."""
    d = result.green.dim
    row = {}
    eps = np.real(np.diag(result.coeffs.eps_r_inf))
    n = np.real(np.diag(result.n_time))
    nf = np.real(np.diag(result.report.n_inf)) if result.report is not None else np.full(d, np.nan)
    for i in range(d):
        row[f"eps_r_{i}"] = eps[i]
    for i in range(d):
        row[f"n_time_{i}"] = n[i]
    for i in range(d):
        row[f"n_freq_{i}"] = nf[i]
    row["T_r"] = result.fit_time.T
    row["mu_r"] = result.fit_time.mu
    row["fit_residual"] = result.fit_time.residual
    row["closure"] = result.trajectory.relative_closure
    row["late_norm_u"] = result.green.late_norm
    row["status"] = result.status
    return row


def point_columns(dim: int) -> list:
    cols = [f"{k}_{i}" for k in ("eps_r", "n_time", "n_freq") for i in range(dim)]
    return cols + ["T_r", "mu_r", "fit_residual", "closure", "late_norm_u", "status"]
