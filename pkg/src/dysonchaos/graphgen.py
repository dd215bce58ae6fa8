"""Watts-Strogatz small-world graphs with stable edge indexing.

Edges are enumerated once from the base circulant and keep their index for
the lifetime of the graph: rewiring changes the endpoints of edge ``e`` but
never ``e`` itself. Couplings are keyed by this index, so a rewired graph
and its base circulant can share one coupling vector.

Randomness comes from :class:`numpy.random.Philox` (a counter-based
generator) keyed by ``SeedSequence([seed, attempt])``. Attempt ``a`` is an
independent substream; a disconnected draw moves on to attempt ``a + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .errors import GenerationError, ValidationError

MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class GraphSpec:
    n_vertices: int
    k: int
    p: float
    seed: int = 0

    def __post_init__(self):
        n, k, p = self.n_vertices, self.k, self.p
        if int(n) != n or n <= 0 or n % 2:
            raise ValidationError(f"n_vertices must be a positive even integer, got {n}")
        if int(k) != k or k < 1:
            raise ValidationError(f"k must be a positive integer, got {k}")
        if n < 2 * k + 2:
            raise ValidationError(f"n_vertices={n} too small for k={k} (need >= {2 * k + 2})")
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {p}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def n_edges(self) -> int:
        return self.k * self.n_vertices


@dataclass(eq=False)
class Graph:
    """Undirected simple graph with indexed edges ``(u, v)``, ``u < v``.

    ``rewired[e]`` records whether edge ``e`` was moved away from its
    circulant position; ``attempt`` is the RNG substream that produced the
    accepted graph.
    """

    n_vertices: int
    edges: np.ndarray
    rewired: np.ndarray = field(default=None)
    spec: GraphSpec | None = None
    attempt: int = 0

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.rewired is None:
            self.rewired = np.zeros(len(self.edges), dtype=bool)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edges]

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def adjacency(self):
        """Symmetric 0/1 adjacency matrix in CSR form."""
        u, v = self.edges[:, 0], self.edges[:, 1]
        ones = np.ones(2 * len(u), dtype=np.int8)
        a = coo_matrix((ones, (np.r_[u, v], np.r_[v, u])), shape=(self.n_vertices,) * 2)
        return a.tocsr()

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_vertices == other.n_vertices and np.array_equal(self.edges, other.edges)


def base_circulant(spec: GraphSpec) -> Graph:
    """Ring lattice where every vertex links to its ``2k`` nearest neighbours.

    Edge ``e = (j - 1) * N + i`` joins ``i`` and ``(i + j) mod N`` for
    ``j = 1..k``; the pair is stored sorted. Independent of ``spec.seed``.
    """
    n, k = spec.n_vertices, spec.k
    i = np.tile(np.arange(n), k)
    j = np.repeat(np.arange(1, k + 1), n)
    a, b = i, (i + j) % n
    edges = np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
    return Graph(n, edges, spec=spec)


def is_connected(g: Graph) -> bool:
    if g.n_vertices <= 1:
        return True
    reached = breadth_first_order(g.adjacency(), 0, directed=False, return_predecessors=False)
    return len(reached) == g.n_vertices


def attempt_rng(seed: int, attempt: int) -> np.random.Generator:
    """Generator for substream ``attempt`` of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(attempt)])))


def _rewire_once(base: Graph, p: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = base.n_vertices
    edges = base.edges.copy()
    # one decision draw per edge, all taken before any endpoint draw so that
    # the selected set at p is a subset of the selected set at any p' >= p
    selected = rng.random(len(edges)) < p
    neighbours = [set() for _ in range(n)]
    for u, v in edges:
        neighbours[u].add(int(v))
        neighbours[v].add(int(u))

    rewired = np.zeros(len(edges), dtype=bool)
    for e in np.flatnonzero(selected):
        u, v = int(edges[e, 0]), int(edges[e, 1])
        if len(neighbours[u]) >= n - 1:
            continue
        while True:
            w = int(rng.integers(n))
            if w != u and w not in neighbours[u]:
                break
        neighbours[u].discard(v)
        neighbours[v].discard(u)
        neighbours[u].add(w)
        neighbours[w].add(u)
        edges[e] = (min(u, w), max(u, w))
        rewired[e] = True
    return edges, rewired


def watts_strogatz(spec: GraphSpec, max_attempts: int = MAX_ATTEMPTS) -> Graph:
    """Connected Watts-Strogatz graph, deterministic in ``spec``.

    Each circulant edge is selected for rewiring with probability ``spec.p``.
    A selected edge keeps its lower endpoint and redraws the other uniformly,
    rejecting self-loops and duplicates. Disconnected outcomes are discarded
    as a whole and regenerated from the next substream.
    """
    base = base_circulant(spec)
    if spec.p == 0.0:
        return base
    for attempt in range(max_attempts):
        edges, rewired = _rewire_once(base, spec.p, attempt_rng(spec.seed, attempt))
        g = Graph(spec.n_vertices, edges, rewired=rewired, spec=spec, attempt=attempt)
        if is_connected(g):
            return g
    raise GenerationError(f"no connected graph after {max_attempts} attempts for {spec}")
