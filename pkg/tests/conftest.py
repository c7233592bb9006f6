import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nodedp import Graph  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def k3():
    return Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def p3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def star4():
    return Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
