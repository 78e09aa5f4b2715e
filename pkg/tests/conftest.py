import numpy as np
import pytest

from kappa_forge.cocycle import grid_calculus
from kappa_forge.fixtures import preset
from kappa_forge.spectral import GridSpec

# lines collected by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def spec():
    return GridSpec()


@pytest.fixture(scope="session")
def gcalc(spec):
    return grid_calculus(1.0, spec)


@pytest.fixture(scope="session")
def grids(spec):
    names = ("gauss1", "gauss2", "gauss3", "bump1", "bump2", "bump3")
    return {n: preset(n).sample(spec) for n in names}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
