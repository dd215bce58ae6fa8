"""
The impurity in the Bogoliubov basis
====================================

Rotating to the modes that diagonalize the quadratic part spreads the
four-Majorana impurity over many quadruples. The participation ratio counts
how many carry weight.
"""

import numpy as np

from dysonchaos import GraphSpec, sample_couplings, watts_strogatz
from dysonchaos.couplings import coupling_matrix
from dysonchaos.dyson import bogoliubov, extensivity_measures, rotate_quartic

for p in (0.0, 1.0):
    g = watts_strogatz(GraphSpec(64, 2, p, seed=4))
    J = coupling_matrix(g, sample_couplings(g, seed=5))
    fac = bogoliubov(J)
    # O J O^T is block diagonal with blocks [[0, eps], [-eps, 0]]
    print("canonical form error", np.abs(fac.O @ J @ fac.O.T - fac.canonical_matrix()).max())
    T = rotate_quartic(fac.O)
    support, pr = extensivity_measures(T)
    print(f"p={p}: sum T^2 = {T.norm2():.12f}, support {support} of {len(T)}, PR {pr:.1f}")
