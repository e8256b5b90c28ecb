import numpy as np
import pytest

from specnet.dynamics import UnitDynamics
from specnet.graph import WeightedDigraph


@pytest.fixture
def two_state_unit():
    """Two-state oscillating unit used in the 15-node example."""
    return UnitDynamics([[-1, -2], [1, -1]], [1, 2], [1, 1])


@pytest.fixture
def consensus_unit():
    return UnitDynamics([[-1.0]], [0.1], [1.0])


@pytest.fixture
def p2():
    return WeightedDigraph(np.array([[0.0, 1.0], [1.0, 0.0]]), undirected=True)


@pytest.fixture
def k3():
    return WeightedDigraph(np.ones((3, 3)) - np.eye(3), undirected=True)
