import numpy as np
import pytest

from iatreg.problems import add_noise, make_blur, make_phillips, make_shaw

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def phillips1000():
    return make_phillips(1000)


@pytest.fixture(scope="session")
def shaw1000():
    return make_shaw(1000)


@pytest.fixture(scope="session")
def blur30():
    return make_blur(30)


@pytest.fixture(scope="session")
def small_problems():
    """Desk-size versions of the three benchmarks with 1% noise."""
    out = {}
    for p in (make_phillips(300), make_shaw(300), make_blur(20)):
        out[p.name] = add_noise(p, 0.01, 11)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
