import warnings

import numpy as np
import pytest

from hls_backstepping.errors import CompatibilityWarning
from hls_backstepping.fd import Grid1D, TimeGrid
from hls_backstepping.kernel import REFERENCE_PARAMS, solve_kernel
from hls_backstepping.spectral import stationary_state

# Filled by tests/test_acceptance.py; printed in the terminal summary.
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def params():
    return REFERENCE_PARAMS


@pytest.fixture(scope="session")
def sol(params):
    return solve_kernel(params)


@pytest.fixture(scope="session")
def grid201(params):
    return Grid1D(201, params.L)


@pytest.fixture(scope="session")
def u0_201(grid201):
    return stationary_state(grid201.x)


@pytest.fixture(scope="session")
def tgrid_ref():
    return TimeGrid(2001, 10.0)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompatibilityWarning)
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
