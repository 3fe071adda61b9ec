import sys
import warnings

import pytest

from boundary_ising import SolverConfig, solve_phi, solve_u


@pytest.fixture(scope="session")
def table():
    return solve_phi()


@pytest.fixture(scope="session")
def table16():
    return solve_phi(SolverConfig(r_max=16.0))


@pytest.fixture(scope="session")
def profiles(table):
    cache = {}

    def get(lam):
        if lam not in cache:
            cache[lam] = solve_u(table, lam)
        return cache[lam]

    return get


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    report = getattr(mod, "REPORT", None)
    if report:
        terminalreporter.section("acceptance criteria")
        for line in report:
            terminalreporter.write_line(line)
