"""
Small-world graphs and random couplings
=======================================

Build the circulant ring, rewire it, and draw Gaussian couplings on its edges.
"""

import numpy as np

from dysonchaos import GraphSpec, base_circulant, sample_couplings, watts_strogatz
from dysonchaos.couplings import coupling_matrix

# The ring with nearest and next-nearest neighbours: N vertices, k N edges.
ring = base_circulant(GraphSpec(12, 2, 0.0))
print(ring.edge_list()[:5])

# Rewiring keeps the lower endpoint of each edge and draws a new partner.
g = watts_strogatz(GraphSpec(12, 2, 0.5, seed=3))
print("rewired edges:", int(g.rewired.sum()), "of", g.n_edges)
print("degrees:", g.degrees())

# Couplings are keyed by edge index, so the same seed gives the same values
# on the ring and on any rewired graph.
c_ring = sample_couplings(ring, seed=7)
c_g = sample_couplings(g, seed=7)
print(np.array_equal(c_ring.values, c_g.values), c_g.sigma**2)

# J is real antisymmetric; iJ is the Hermitian single-particle matrix.
J = coupling_matrix(g, c_g)
print(np.allclose(J, -J.T), np.round(np.linalg.eigvalsh(1j * J)[-3:], 4))
