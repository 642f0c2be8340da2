import numpy as np
import pytest

from modcyl.geometry import Geometry
from modcyl.probes import standard_probes
from modcyl.states import StateParams


@pytest.fixture(scope="session")
def geo():
    return Geometry(4.0, 1.0)


@pytest.fixture(scope="session")
def probes(geo):
    return standard_probes(geo)


@pytest.fixture(scope="session")
def mixed(geo):
    b = 1.0 / (2 * geo.L)
    return StateParams.ramond(0.2 * b, -0.5 * b, 1.0, 0.7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(k for k in LINES if isinstance(k, int)):
        terminalreporter.write_line(LINES[key])
    if "elapsed" in LINES:
        terminalreporter.write_line(LINES["elapsed"])
