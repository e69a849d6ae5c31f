import pytest

from thermolab.grid import Grid
from thermolab.model import PhysParams


@pytest.fixture
def unit_params():
    return PhysParams(epsilon=1.0, delta=1.0, kappa=2.0, gamma=0.25, theta0=1.0)


@pytest.fixture
def small_grid():
    return Grid(12.0, 239)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        status, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
