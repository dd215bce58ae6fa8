"""Gaussian edge couplings and the single-particle hopping matrix ``iJ``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ValidationError
from .graphgen import Graph


@dataclass(eq=False)
class CouplingSet:
    """Couplings ``J_e`` indexed by edge, drawn with standard deviation ``sigma``."""

    values: np.ndarray
    sigma: float
    seed: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self):
        return len(self.values)


def coupling_variance(n_vertices: int, n_edges: int) -> float:
    """Variance ``(N - 1) / (2 n_E)`` of every coupling."""
    return (n_vertices - 1) / (2.0 * n_edges)


def coupling_rng(seed: int) -> np.random.Generator:
    # distinct leading word keeps coupling streams apart from graph substreams
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([0x4A, int(seed)])))


def sample_couplings(g: Graph, seed: int) -> CouplingSet:
    """I.i.d. zero-mean Gaussians, consumed in edge-index order.

    The draw depends on ``(N, n_E, seed)`` only, so any two graphs with the same
    size share the same coupling vector for the same seed.
    """
    sigma = float(np.sqrt(coupling_variance(g.n_vertices, g.n_edges)))
    values = sigma * coupling_rng(seed).standard_normal(g.n_edges)
    return CouplingSet(values, sigma, int(seed))


def _check_lengths(g: Graph, c: CouplingSet):
    if len(c.values) != g.n_edges:
        raise ValidationError(f"{len(c.values)} couplings for a graph with {g.n_edges} edges")


def coupling_matrix(g: Graph, c: CouplingSet) -> np.ndarray:
    """Real antisymmetric ``J`` with ``J[u, v] = J_e`` for edge ``e = (u, v)``, ``u < v``."""
    _check_lengths(g, c)
    n = g.n_vertices
    J = np.zeros((n, n))
    u, v = g.edges[:, 0], g.edges[:, 1]
    J[u, v] = c.values
    J[v, u] = -c.values
    return J


def single_particle_matrix(g: Graph, c: CouplingSet, *, as_sparse: bool = False):
    """Hermitian hopping matrix ``h = iJ``.

    ``h[u, v] = i J_e`` and ``h[v, u] = -i J_e``. Returned dense by default,
    or as a CSR matrix with exactly ``2 n_E`` stored entries.
    """
    _check_lengths(g, c)
    n = g.n_vertices
    u, v = g.edges[:, 0], g.edges[:, 1]
    if as_sparse:
        rows = np.r_[u, v]
        cols = np.r_[v, u]
        vals = np.r_[1j * c.values, -1j * c.values]
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    h = np.zeros((n, n), dtype=np.complex128)
    h[u, v] = 1j * c.values
    h[v, u] = -1j * c.values
    return h
