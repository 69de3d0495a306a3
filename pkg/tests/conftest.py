import numpy as np
import pytest

from reviso.geometry import from_points, regular_simplex


@pytest.fixture
def square():
    return from_points(np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], float))


@pytest.fixture
def tri():
    return regular_simplex(2)


def rng(seed=0):
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
