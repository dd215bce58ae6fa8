"""Quadratic SYK on small-world graphs with a single quartic impurity.

Graph generation, Majorana Hamiltonians in a parity sector, dense and
Chebyshev-filter eigensolvers, r-ratio statistics and the single-particle
(Bogoliubov) analysis.
"""
from .couplings import CouplingSet, coupling_matrix, sample_couplings, single_particle_matrix
from .dyson import (
    BogoliubovFactorization,
    QuarticTensor,
    bogoliubov,
    extensivity_measures,
    rotate_quartic,
    single_particle_rstats,
)
from .eigensolve import (
    FilterConfig,
    SpectralWindow,
    Spectrum,
    chebyshev_filter_apply,
    dense_eigh,
    filter_diagonalize,
    spectral_bounds,
)
from .errors import CapabilityError, ConvergenceError, GenerationError, ValidationError
from .fermion import (
    PauliTerm,
    SectorOperator,
    SparseHamiltonian,
    assemble_hamiltonian,
    impurity_term,
    majorana_term,
    quadratic_spectrum_oracle,
)
from .graphgen import Graph, GraphSpec, base_circulant, is_connected, watts_strogatz
from .pipeline import ExperimentConfig, derive_seed, load_config, run_experiment
from .stats import RStatistics, gue_sample, histogram, ipr, mean_r_central, r_ratios

__version__ = "0.1.0"
