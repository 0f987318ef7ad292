from __future__ import annotations

import numpy as np
import pytest

from loopnet.graph import WeightedGraph, complete_graph, path_graph, triangle, two_vertex


@pytest.fixture
def pair():
    return two_vertex()


@pytest.fixture
def tri():
    return triangle()


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def path3():
    return path_graph(3, kappa=0.5)


@pytest.fixture
def lopsided():
    # irregular weights so that row and column conventions differ
    return WeightedGraph(4, ((0, 1, 1.0), (1, 2, 2.5), (2, 0, 0.7), (2, 3, 1.3)), (0.4, 0.0, 1.1, 0.6))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
