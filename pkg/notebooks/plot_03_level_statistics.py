"""
Reference values of the spacing ratio
=====================================

Poisson levels give 2 ln 2 - 1; GUE matrices give about 0.60.
"""

import numpy as np

from dysonchaos.stats import (
    POISSON_EXACT,
    REFERENCE_VALUES,
    gue_sample,
    histogram,
    mean_r_central,
    poisson_levels,
    r_ratios,
)

print(REFERENCE_VALUES)

r = r_ratios(poisson_levels(10**5, seed=0))
print("Poisson", r.mean().round(4), "exact", round(POISSON_EXACT, 4))

# A single 1000 x 1000 sample fluctuates by about 0.02 around the ensemble value.
gue = [mean_r_central(gue_sample(1000, seed=s)).mean_r for s in range(8)]
print("GUE samples", np.round(gue, 3), "average", round(np.mean(gue), 3))

h = histogram(gue, 7, (0.55, 0.66))
print(h.counts, "outside:", h.below + h.above)
