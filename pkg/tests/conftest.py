from __future__ import annotations

import pytest

from restorable.generators import complete, cycle, gnp, path
from restorable.graph import UndirectedGraph
from restorable.tiebreak import PerturbedDigraph, Rpts


@pytest.fixture
def c4() -> UndirectedGraph:
    return cycle(4)


@pytest.fixture
def c4_example_scheme(c4) -> Rpts:
    """C4 with p(0,1)=3, p(1,2)=-1, p(2,3)=2, p(3,0)=-2."""
    pd = PerturbedDigraph.from_perturbation(c4, {(0, 1): 3, (1, 2): -1, (2, 3): 2, (3, 0): -2}, K=64)
    return Rpts(pd)


@pytest.fixture
def p4() -> UndirectedGraph:
    return path(4)


@pytest.fixture
def k4() -> UndirectedGraph:
    return complete(4)


def small_gnp(n: int, p: float, seed: int) -> UndirectedGraph:
    return gnp(n, p, seed)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
