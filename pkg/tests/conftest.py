import math

import numpy as np
import pytest

from jetflow import PolyVec, hill_intervals

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def harmonic():
    F = PolyVec([[0.0, 1.0]])
    return F, hill_intervals(F)[0]


@pytest.fixture
def harmonic2():
    c = 1 / math.sqrt(2)
    F = PolyVec([[0.0, c], [0.0, c]])
    return F, hill_intervals(F)[0]


@pytest.fixture
def critical():
    F = PolyVec([[-1.0, 0.0, 2.0]])
    return F, hill_intervals(F)[1]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
