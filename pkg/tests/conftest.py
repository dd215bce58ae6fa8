import numpy as np
import pytest

from dysonchaos.couplings import CouplingSet, sample_couplings
from dysonchaos.graphgen import GraphSpec, watts_strogatz


def random_instance(N, p, graph_seed, coupling_seed, k=2):
    k = min(k, (N - 2) // 2)
    g = watts_strogatz(GraphSpec(N, k, p, graph_seed))
    return g, sample_couplings(g, coupling_seed)


def zero_couplings(g):
    return CouplingSet(np.zeros(g.n_edges), 0.0, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
