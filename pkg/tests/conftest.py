import numpy as np
import pytest

from pcipmd import InterferenceGraph


def random_symmetric(n, rng, b=1.0):
    w0 = rng.uniform(0.0, b, size=(n, n))
    w = (w0 + w0.T) / 2
    np.fill_diagonal(w, 0.0)
    return w


def hexagon_flower():
    """Seven hexagonal cells: 0-based centre 3 surrounded by a ring 0,1,2,4,5,6."""
    ring = [0, 1, 2, 4, 5, 6]
    e1 = [(3, c) for c in ring]
    e1 += [(ring[a], ring[(a + 1) % 6]) for a in range(6)]
    rng = np.random.default_rng(11)
    w = np.zeros((7, 7))
    for i, j in e1:
        w[i, j] = w[j, i] = rng.uniform(0.5, 1.5)
    return InterferenceGraph(weights=w, neighbors=e1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
