import numpy as np
import pytest

from fdhomog.curves import FunctionalSample, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def unit3():
    return Grid([0.0, 0.5, 1.0])


@pytest.fixture
def three_constants(unit3):
    """Constant curves 0, 1 and 2 on [0, 1]."""
    return FunctionalSample(unit3, [[0.0] * 3, [1.0] * 3, [2.0] * 3])


def constants(grid, levels):
    return FunctionalSample(grid, [[float(c)] * len(grid) for c in levels])


def random_sample(rng, n, m, ties=False):
    t = np.sort(rng.uniform(0, 1, m))
    t[0], t[-1] = 0.0, 1.0
    t = np.unique(t)
    while t.size < m:
        t = np.unique(np.append(t, rng.uniform(0, 1)))
    x = rng.standard_normal((n, m))
    if ties:
        x = np.round(x)
    return FunctionalSample(Grid(t), x)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
