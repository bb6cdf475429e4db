import numpy as np
import pytest
from hypothesis import settings

from thermoforge.model import Lorentzian, Ohmic, ReservoirSpec, Statistics, SystemSpec

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


def one_mode(sd, T=1.0, eps=1.0, stat=Statistics.BOSONIC, mu=0.0, n0=0.0):
    res = ReservoirSpec(stat, T, sd, chemical_potential=mu)
    return SystemSpec(np.array([[eps]], dtype=complex), stat, (res,),
                      initial_occupation=np.array([[n0]], dtype=complex))


@pytest.fixture
def lorentz_dot():
    return one_mode(Lorentzian(0.5, 4.0), T=0.5, eps=1.0, stat=Statistics.FERMIONIC, mu=0.3)


@pytest.fixture
def ohmic_weak():
    return one_mode(Ohmic(0.3 / 5.0, 5.0), T=2.0)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, when that suite ran."""
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
