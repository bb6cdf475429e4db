"""Exception hierarchy.

Every error carries a stable ``code`` (the class name) so the CLI can emit
machine-readable diagnostics.
"""

from __future__ import annotations


class ThermoforgeError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def as_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return value if isinstance(value, (str, list, dict, type(None))) else repr(value)


# -- configuration ----------------------------------------------------------

class ConfigError(ThermoforgeError):
    pass


class NonHermitianEnergyMatrix(ConfigError):
    pass


class NegativeSpectralDensity(ConfigError):
    pass


class FermionOccupationOutOfRange(ConfigError):
    pass


class BosonicNonzeroMu(ConfigError):
    pass


class BadGrid(ConfigError):
    pass


class UnsupportedCombination(ConfigError):
    pass


class InvalidInitialState(ConfigError):
    pass


class ScenarioValidationError(ConfigError):
    """Raised with the complete list of violated invariants."""

    def __init__(self, issues):
        self.issues = list(issues)
        msg = "; ".join(f"{i.code}: {i.message}" for i in self.issues)
        super().__init__(msg)

    def as_dict(self) -> dict:
        return {
            "error": self.code,
            "issues": [{"code": i.code, "message": i.message} for i in self.issues],
        }


# -- numerics ---------------------------------------------------------------

class OutOfSupport(ThermoforgeError):
    pass


class BosonicBelowMu(ThermoforgeError):
    pass


class QuadratureNonConvergence(ThermoforgeError):
    pass


class NonConvergence(ThermoforgeError):
    pass


class StepTooLarge(ThermoforgeError):
    pass


class MemoryBudgetExceeded(ThermoforgeError):
    pass


class PositivityViolation(ThermoforgeError):
    pass


class GridTooShort(ThermoforgeError):
    pass


class SingularU(ThermoforgeError):
    pass


# -- states and thermodynamics ----------------------------------------------

class TruncationTooSmall(ThermoforgeError):
    pass


class OccupationOutOfRange(ThermoforgeError):
    pass


class EigenvalueOutOfRange(ThermoforgeError):
    pass


class NonGaussianStateRequiresFockPath(ThermoforgeError):
    pass


class NewtonNonConvergence(ThermoforgeError):
    pass


class DegenerateSystem(ThermoforgeError):
    pass


class ClosureViolation(ThermoforgeError):
    pass


class NonMonotoneTr(ThermoforgeError):
    pass


class LocalizedModePresent(ThermoforgeError):
    pass


class PartialFailure(ThermoforgeError):
    pass
