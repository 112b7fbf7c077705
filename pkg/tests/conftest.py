import warnings

import numpy as np
import pytest

from coolshape.adjoint import solve_adjoint
from coolshape.config import load_config
from coolshape.mesh import unit_square
from coolshape.state import BoundaryData, PhysicalParams, solve_state


@pytest.fixture(autouse=True)
def _quiet_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield


@pytest.fixture(scope="session")
def demo():
    """The default channel-array configuration (h = 1/16, auto weights)."""
    setup = load_config().build()
    setup.objective()
    return setup


@pytest.fixture(scope="session")
def demo_solution(demo):
    U = demo.state()
    return U, solve_adjoint(U, demo.objective())


@pytest.fixture(scope="session")
def poiseuille_square():
    mesh = unit_square(4)
    data = BoundaryData.from_strings(["y*(1-y)", "0"], "0", "0")
    return mesh, PhysicalParams(), data, solve_state(mesh, PhysicalParams(), data)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
