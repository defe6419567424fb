import numpy as np
import pytest

from sstagcn import Graph, SyntheticSpec, generate_synthetic, normalize_adjacency
from sstagcn.experiment import SYNTHETIC_DEFAULTS


@pytest.fixture
def path_graph():
    """Three nodes in a path 0-1-2."""
    return Graph(
        features=np.eye(3),
        labels=np.array([0, 1, 0]),
        num_classes=2,
        edges=np.array([[0, 1], [1, 2]]),
    )


@pytest.fixture
def star_graph():
    """Center node 0 with three leaves."""
    return Graph(
        features=np.eye(4),
        labels=np.array([0, 1, 1, 1]),
        num_classes=2,
        edges=np.array([[0, 1], [0, 2], [0, 3]]),
    )


def random_graph(rng, n_nodes=None, n_classes=None, dim=None, edge_prob=0.2):
    """Random undirected graph with Gaussian features, for fuzz tests."""
    n = n_nodes or int(rng.integers(2, 30))
    k = n_classes or int(rng.integers(2, 5))
    d = dim or int(rng.integers(1, 6))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < edge_prob
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    return Graph(
        features=rng.normal(size=(n, d)),
        labels=rng.integers(0, k, size=n),
        num_classes=k,
        edges=edges,
    )


@pytest.fixture(scope="session")
def synthetic_bundle():
    """The default 4-cluster bundle used across pipeline tests."""
    return generate_synthetic(SyntheticSpec(**SYNTHETIC_DEFAULTS))


@pytest.fixture(scope="session")
def synthetic_adj(synthetic_bundle):
    return normalize_adjacency(synthetic_bundle.graph)
