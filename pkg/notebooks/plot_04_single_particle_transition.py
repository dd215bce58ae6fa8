"""
Localized to extended: the single-particle problem
==================================================

The hopping matrix iJ has Poisson statistics on the ring and GUE statistics
once the graph is rewired. Eigenvectors delocalize at the same time.
"""

import numpy as np

from dysonchaos import GraphSpec, sample_couplings, watts_strogatz
from dysonchaos.couplings import single_particle_matrix
from dysonchaos.dyson import single_particle_rstats
from dysonchaos.stats import ipr

N = 1000
for p in (0.0, 0.05, 0.2, 1.0):
    rs, iprs = [], []
    for i in range(3):
        g = watts_strogatz(GraphSpec(N, 2, p, seed=i))
        c = sample_couplings(g, seed=100 + i)
        rs.append(single_particle_rstats(g, c).mean_r)
        w, V = np.linalg.eigh(single_particle_matrix(g, c))
        mid = np.argsort(np.abs(w - np.median(w[w > 0])))[:50]
        iprs.append(np.mean([ipr(V[:, j]) for j in mid]))
    print(f"p={p:<5} <r>={np.mean(rs):.3f}  mid-band IPR={np.mean(iprs):.4f}")
