"""Domain types: statistics, spectral densities, reservoirs, systems, scenarios.

Internal units are hbar = k_B = 1. Energies (levels, temperatures, chemical
potentials, spectral parameters) are measured in a reference energy, by
default the first bare level (omega_s for a single bosonic mode, eps_up for
the quantum dot); times are measured in the inverse reference energy.

Occupation matrices follow ``N_ij = <a_j^dag a_i>`` so that the propagated
occupation reads ``N(t) = u N(t0) u^dag + v`` and the energy is
``Tr[eps N]``.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import errors

HERMITIAN_TOL = 1e-12
SCHEMA_VERSION = 1


class Statistics(enum.Enum):
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"

    @property
    def sign(self) -> int:
        """+1 for bosons, -1 for fermions (the upper/lower signs)."""
        return 1 if self is Statistics.BOSONIC else -1

    @classmethod
    def parse(cls, value) -> "Statistics":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


# -- spectral densities -----------------------------------------------------

@dataclass(frozen=True)
class Ohmic:
    """J(w) = eta * w * exp(-w / omega_c) on [0, inf)."""

    eta: float
    omega_c: float

    kind = "ohmic"
    support = (0.0, math.inf)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        out = self.eta * w * np.exp(-np.abs(w) / self.omega_c)
        return np.where(w >= 0.0, out, 0.0)

    @property
    def total_weight(self) -> float:
        return self.eta * self.omega_c**2

    def scaled(self, s: float) -> "Ohmic":
        return Ohmic(self.eta, self.omega_c / s)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "eta": self.eta, "omega_c": self.omega_c}


@dataclass(frozen=True)
class Lorentzian:
    """J(e) = gamma * d**2 / (e**2 + d**2) on the whole real line."""

    gamma: float
    d: float

    kind = "lorentzian"
    support = (-math.inf, math.inf)

    def __call__(self, e):
        e = np.asarray(e, dtype=float)
        return self.gamma * self.d**2 / (e * e + self.d**2)

    @property
    def total_weight(self) -> float:
        return math.pi * self.gamma * self.d

    def scaled(self, s: float) -> "Lorentzian":
        return Lorentzian(self.gamma / s, self.d / s)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma, "d": self.d}


SpectralDensityModel = Union[Ohmic, Lorentzian]


def critical_eta(omega_s: float, omega_c: float) -> float:
    """Ohmic coupling above which a bound state splits off below the band."""
    return omega_s / omega_c


def spectral_density_from_dict(d: dict, omega_s: Optional[float] = None) -> SpectralDensityModel:
    kind = d["kind"].lower()
    if kind == "ohmic":
        omega_c = float(d["omega_c"])
        if "eta" in d:
            eta = float(d["eta"])
        elif "eta_over_etac" in d:
            if omega_s is None:
                raise errors.ConfigError("eta_over_etac needs the system frequency")
            eta = float(d["eta_over_etac"]) * critical_eta(omega_s, omega_c)
        else:
            raise errors.ConfigError("ohmic spectral density needs eta or eta_over_etac")
        return Ohmic(eta, omega_c)
    if kind == "lorentzian":
        return Lorentzian(float(d["gamma"]), float(d["d"]))
    raise errors.ConfigError(f"unknown spectral density kind {kind!r}")


# -- reservoirs and systems -------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReservoirSpec:
    statistics: Statistics
    temperature: float
    spectral_density: SpectralDensityModel
    chemical_potential: float = 0.0
    # None means level-diagonal coupling (identity); otherwise a Hermitian
    # PSD matrix multiplying the scalar spectral density.
    coupling: Optional[np.ndarray] = None

    def coupling_matrix(self, dim: int) -> np.ndarray:
        if self.coupling is None:
            return np.eye(dim, dtype=complex)
        return np.asarray(self.coupling, dtype=complex)

    def J(self, w, dim: int = 1) -> np.ndarray:
        """Matrix spectral density, shape ``w.shape + (dim, dim)``."""
        jw = np.asarray(self.spectral_density(w))
        return jw[..., None, None] * self.coupling_matrix(dim)

    def scaled(self, s: float) -> "ReservoirSpec":
        return dataclasses.replace(
            self,
            temperature=self.temperature / s,
            chemical_potential=self.chemical_potential / s,
            spectral_density=self.spectral_density.scaled(s),
        )


@dataclass(frozen=True, eq=False)
class SystemSpec:
    energy_matrix: np.ndarray
    statistics: Statistics
    reservoirs: tuple = ()
    initial_occupation: Optional[np.ndarray] = None
    # single bosonic mode only: initial density matrix in the Fock basis
    initial_fock: Optional[np.ndarray] = None

    def __post_init__(self):
        eps = np.atleast_2d(np.asarray(self.energy_matrix, dtype=complex))
        object.__setattr__(self, "energy_matrix", eps)
        object.__setattr__(self, "reservoirs", tuple(self.reservoirs))
        if self.initial_occupation is not None:
            n0 = np.atleast_2d(np.asarray(self.initial_occupation, dtype=complex))
            object.__setattr__(self, "initial_occupation", n0)
        if self.initial_fock is not None:
            object.__setattr__(self, "initial_fock", np.atleast_2d(np.asarray(self.initial_fock, dtype=complex)))

    @property
    def dim(self) -> int:
        return self.energy_matrix.shape[0]

    @property
    def reference_energy(self) -> float:
        e0 = abs(self.energy_matrix[0, 0].real)
        return e0 if e0 > 0 else 1.0

    def initial_n(self) -> np.ndarray:
        """Initial occupation matrix, derived from the Fock state if given."""
        if self.initial_fock is not None:
            rho = self.initial_fock
            n = np.arange(rho.shape[0])
            return np.array([[np.real(np.sum(n * np.diag(rho)))]], dtype=complex)
        if self.initial_occupation is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.initial_occupation

    def total_J(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        out = np.zeros(w.shape + (self.dim, self.dim), dtype=complex)
        for r in self.reservoirs:
            out = out + r.J(w, self.dim)
        return out

    def scaled(self, s: float) -> "SystemSpec":
        return dataclasses.replace(
            self,
            energy_matrix=self.energy_matrix / s,
            reservoirs=tuple(r.scaled(s) for r in self.reservoirs),
        )


# -- scenario configuration -------------------------------------------------

@dataclass(frozen=True)
class TimeGrid:
    t_max: float
    dt: float
    # also solve on 2 dt and extrapolate the final occupation (second order)
    richardson: bool = False

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class FrequencyGrid:
    omega_min: float
    omega_max: float
    n_points: int

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_points)


@dataclass(frozen=True)
class Tolerances:
    steady_state_tol: float = 1e-2
    quadrature_tol: float = 1e-10
    newton_tol: float = 1e-12
    solver_tol: float = 1e-8
    u_floor: float = 1e-2
    closure_tol: float = 1e-4


SWEEP_PARAMS = ("eta_over_etac", "gamma", "T0")


@dataclass(frozen=True)
class SweepDescriptor:
    param: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.min])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class OutputSpec:
    path: str = "out"
    format: str = "csv"


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    system: SystemSpec
    time_grid: TimeGrid
    frequency_grid: FrequencyGrid = FrequencyGrid(-20.0, 20.0, 401)
    n_max: int = 60
    tolerances: Tolerances = field(default_factory=Tolerances)
    sweep: Optional[SweepDescriptor] = None
    output: OutputSpec = field(default_factory=OutputSpec)
    name: str = "scenario"
    # None: pick system.reference_energy. Validated configs carry 1.0.
    energy_scale: Optional[float] = None
    physical_energy_scale: float = 1.0
    schema_version: int = SCHEMA_VERSION

    @property
    def normalized(self) -> bool:
        return self.energy_scale == 1.0


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str


# -- validation --------------------------------------------------------------

def _is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0.0, atol=tol)


def _check_system(sys: SystemSpec) -> list:
    issues = []
    eps = sys.energy_matrix
    if eps.ndim != 2 or eps.shape[0] != eps.shape[1]:
        issues.append(ValidationIssue("NonHermitianEnergyMatrix", f"energy matrix must be square, got {eps.shape}"))
    elif not _is_hermitian(eps):
        dev = float(np.max(np.abs(eps - eps.conj().T)))
        issues.append(ValidationIssue("NonHermitianEnergyMatrix", f"max |eps - eps^dag| = {dev:.3g}"))
    dim = eps.shape[0]

    for k, r in enumerate(sys.reservoirs):
        tag = f"reservoir[{k}]"
        if r.statistics is not sys.statistics:
            issues.append(ValidationIssue("UnsupportedCombination", f"{tag}: statistics differ from the system"))
        if not r.temperature >= 0.0:
            issues.append(ValidationIssue("BadGrid", f"{tag}: temperature must be >= 0"))
        if r.statistics is Statistics.BOSONIC and r.chemical_potential != 0.0:
            issues.append(ValidationIssue("BosonicNonzeroMu", f"{tag}: bosonic reservoirs require mu = 0"))
        sd = r.spectral_density
        if isinstance(sd, Ohmic):
            if not (sd.eta > 0 and sd.omega_c > 0):
                issues.append(ValidationIssue("NegativeSpectralDensity", f"{tag}: eta and omega_c must be > 0"))
            if r.statistics is not Statistics.BOSONIC:
                issues.append(ValidationIssue("UnsupportedCombination", f"{tag}: Ohmic density is bosonic only"))
        elif isinstance(sd, Lorentzian):
            if not (sd.gamma > 0 and sd.d > 0):
                issues.append(ValidationIssue("NegativeSpectralDensity", f"{tag}: gamma and d must be > 0"))
            if r.statistics is not Statistics.FERMIONIC:
                issues.append(ValidationIssue("UnsupportedCombination", f"{tag}: Lorentzian density is fermionic only"))
        else:
            issues.append(ValidationIssue("UnsupportedCombination", f"{tag}: unknown spectral density {sd!r}"))
        if r.coupling is not None:
            c = np.asarray(r.coupling, dtype=complex)
            if c.shape != (dim, dim) or not _is_hermitian(c):
                issues.append(ValidationIssue("NegativeSpectralDensity", f"{tag}: coupling must be a Hermitian {dim}x{dim} matrix"))
            elif np.linalg.eigvalsh(c).min() < -HERMITIAN_TOL:
                issues.append(ValidationIssue("NegativeSpectralDensity", f"{tag}: coupling matrix is not PSD"))

    if sys.initial_occupation is not None:
        n0 = sys.initial_occupation
        if n0.shape != (dim, dim) or not _is_hermitian(n0):
            issues.append(ValidationIssue("InvalidInitialState", "initial occupation must be Hermitian and match the system size"))
        else:
            lam = np.linalg.eigvalsh(n0)
            if sys.statistics is Statistics.FERMIONIC and (lam.min() < -HERMITIAN_TOL or lam.max() > 1 + HERMITIAN_TOL):
                issues.append(ValidationIssue("FermionOccupationOutOfRange", f"eigenvalues {lam} outside [0, 1]"))
            elif lam.min() < -HERMITIAN_TOL:
                issues.append(ValidationIssue("InvalidInitialState", "initial occupation is not PSD"))

    if sys.initial_fock is not None:
        rho = sys.initial_fock
        if dim != 1 or sys.statistics is not Statistics.BOSONIC:
            issues.append(ValidationIssue("InvalidInitialState", "Fock initial states need a single bosonic mode"))
        elif not _is_hermitian(rho, 1e-10):
            issues.append(ValidationIssue("InvalidInitialState", "initial Fock density matrix is not Hermitian"))
        else:
            lam = np.linalg.eigvalsh(rho)
            if lam.min() < -1e-10 or abs(np.trace(rho).real - 1.0) > 1e-10:
                issues.append(ValidationIssue("InvalidInitialState", "initial Fock density matrix must be PSD with unit trace"))
    return issues


def _check_grids(cfg: ScenarioConfig) -> list:
    issues = []
    tg = cfg.time_grid
    if not tg.dt > 0:
        issues.append(ValidationIssue("BadGrid", "dt must be > 0"))
    elif not tg.t_max > tg.dt:
        issues.append(ValidationIssue("BadGrid", "t_max must exceed dt"))
    fg = cfg.frequency_grid
    if not (fg.omega_min < fg.omega_max and fg.n_points >= 2):
        issues.append(ValidationIssue("BadGrid", "frequency grid needs omega_min < omega_max and n_points >= 2"))
    if not cfg.n_max >= 1:
        issues.append(ValidationIssue("BadGrid", "Fock cutoff n_max must be >= 1"))
    for name, value in dataclasses.asdict(cfg.tolerances).items():
        if not value > 0:
            issues.append(ValidationIssue("BadGrid", f"tolerance {name} must be > 0"))
    sw = cfg.sweep
    if sw is not None:
        if sw.param not in SWEEP_PARAMS:
            issues.append(ValidationIssue("BadGrid", f"unknown sweep parameter {sw.param!r}"))
        if sw.points < 1 or (sw.points >= 2 and not sw.min < sw.max):
            issues.append(ValidationIssue("BadGrid", "sweep needs min < max and points >= 2 (or a single point)"))
        if sw.scale not in ("linear", "log") or (sw.scale == "log" and sw.min <= 0):
            issues.append(ValidationIssue("BadGrid", "sweep scale must be linear, or log with min > 0"))
    if cfg.energy_scale is not None and not cfg.energy_scale > 0:
        issues.append(ValidationIssue("BadGrid", "energy_scale must be > 0"))
    return issues


def _rescale(cfg: ScenarioConfig, s: float) -> ScenarioConfig:
    """Energies divided by ``s``, times multiplied by ``s``."""
    fg = cfg.frequency_grid
    return dataclasses.replace(
        cfg,
        system=cfg.system.scaled(s),
        time_grid=dataclasses.replace(cfg.time_grid, t_max=cfg.time_grid.t_max * s, dt=cfg.time_grid.dt * s),
        frequency_grid=FrequencyGrid(fg.omega_min / s, fg.omega_max / s, fg.n_points),
        sweep=_rescale_sweep(cfg.sweep, s),
    )


def _rescale_sweep(sw: Optional[SweepDescriptor], s: float) -> Optional[SweepDescriptor]:
    if sw is None or sw.param == "eta_over_etac":
        return sw
    return dataclasses.replace(sw, min=sw.min / s, max=sw.max / s)


def validate_scenario(config: ScenarioConfig) -> ScenarioConfig:
    """Check every invariant and return the scenario in internal units.

    Raises ScenarioValidationError listing all violations. Validating an
    already validated scenario returns an equal scenario.
    """
    issues = _check_system(config.system) + _check_grids(config)
    if issues:
        raise errors.ScenarioValidationError(issues)
    s = config.energy_scale if config.energy_scale is not None else config.system.reference_energy
    out = _rescale(config, s) if s != 1.0 else config
    return dataclasses.replace(out, energy_scale=1.0, physical_energy_scale=config.physical_energy_scale * s)


def to_physical(config: ScenarioConfig) -> ScenarioConfig:
    """Undo the unit normalization of a validated scenario."""
    s = config.physical_energy_scale
    out = _rescale(config, 1.0 / s) if s != 1.0 else config
    return dataclasses.replace(out, energy_scale=s, physical_energy_scale=1.0)


# -- JSON ---------------------------------------------------------------------

def _matrix_from_json(obj, imag=None) -> np.ndarray:
    m = np.atleast_2d(np.asarray(obj, dtype=float)).astype(complex)
    if imag is not None:
        m = m + 1j * np.atleast_2d(np.asarray(imag, dtype=float))
    return m


def _matrix_to_json(m: np.ndarray):
    m = np.asarray(m)
    out = {"real": m.real.tolist()}
    if np.any(m.imag != 0):
        out["imag"] = m.imag.tolist()
    return out


def _read_matrix(d: dict, key: str):
    if key not in d or d[key] is None:
        return None
    v = d[key]
    if isinstance(v, dict):
        return _matrix_from_json(v["real"], v.get("imag"))
    return _matrix_from_json(v)


def config_from_dict(d: dict) -> ScenarioConfig:
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise errors.ConfigError(f"unsupported schema_version {version}")
    sd = d["system"]
    stats = Statistics.parse(sd["statistics"])
    eps = _read_matrix(sd, "energy_matrix")
    omega_s = abs(eps[0, 0].real)
    reservoirs = []
    for rd in sd.get("reservoirs", []):
        coupling = rd.get("coupling", "diagonal")
        cm = None if coupling in (None, "diagonal") else _read_matrix(rd, "coupling")
        reservoirs.append(ReservoirSpec(
            statistics=Statistics.parse(rd.get("statistics", stats.value)),
            temperature=float(rd["temperature"]),
            chemical_potential=float(rd.get("chemical_potential", 0.0)),
            spectral_density=spectral_density_from_dict(rd["spectral_density"], omega_s),
            coupling=cm,
        ))
    system = SystemSpec(
        energy_matrix=eps,
        statistics=stats,
        reservoirs=tuple(reservoirs),
        initial_occupation=_read_matrix(sd, "initial_occupation"),
        initial_fock=_read_matrix(sd, "initial_fock"),
    )
    tg = d["time_grid"]
    fg = d.get("frequency_grid")
    tol = d.get("tolerances", {})
    sw = d.get("sweep")
    out = d.get("output", {})
    return ScenarioConfig(
        system=system,
        time_grid=TimeGrid(float(tg["t_max"]), float(tg["dt"]), bool(tg.get("richardson", False))),
        frequency_grid=FrequencyGrid(float(fg["omega_min"]), float(fg["omega_max"]), int(fg["n_points"])) if fg else FrequencyGrid(-20.0, 20.0, 401),
        n_max=int(d.get("truncation", {}).get("n_max", 60)),
        tolerances=Tolerances(**{k: float(v) for k, v in tol.items()}),
        sweep=SweepDescriptor(sw["param"], float(sw["min"]), float(sw["max"]), int(sw["points"]), sw.get("scale", "linear")) if sw else None,
        output=OutputSpec(out.get("path", "out"), out.get("format", "csv")),
        name=d.get("name", "scenario"),
        energy_scale=d.get("energy_scale"),
    )


def config_to_dict(cfg: ScenarioConfig) -> dict:
    sys = cfg.system
    res = []
    for r in sys.reservoirs:
        rd = {
            "statistics": r.statistics.value,
            "temperature": r.temperature,
            "chemical_potential": r.chemical_potential,
            "spectral_density": r.spectral_density.to_dict(),
        }
        rd["coupling"] = "diagonal" if r.coupling is None else _matrix_to_json(r.coupling)
        res.append(rd)
    sd = {
        "statistics": sys.statistics.value,
        "energy_matrix": _matrix_to_json(sys.energy_matrix),
        "reservoirs": res,
    }
    if sys.initial_occupation is not None:
        sd["initial_occupation"] = _matrix_to_json(sys.initial_occupation)
    if sys.initial_fock is not None:
        sd["initial_fock"] = _matrix_to_json(sys.initial_fock)
    out = {
        "schema_version": cfg.schema_version,
        "name": cfg.name,
        "system": sd,
        "time_grid": dataclasses.asdict(cfg.time_grid),
        "frequency_grid": dataclasses.asdict(cfg.frequency_grid),
        "truncation": {"n_max": cfg.n_max},
        "tolerances": dataclasses.asdict(cfg.tolerances),
        "output": dataclasses.asdict(cfg.output),
    }
    if cfg.sweep is not None:
        out["sweep"] = dataclasses.asdict(cfg.sweep)
    if cfg.energy_scale is not None:
        out["energy_scale"] = cfg.energy_scale
    return out


def load_config(path) -> ScenarioConfig:
    with open(Path(path)) as fh:
        return config_from_dict(json.load(fh))
