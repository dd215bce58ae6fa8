"""Majorana operators as Pauli strings and the many-body Hamiltonian in a parity sector.

Convention: ``{gamma^i, gamma^j} = delta^{ij}``. Site ``i`` (1-based) lives on
qubit ``q = ceil(i / 2)`` (bit ``q - 1`` of a basis index) with

    gamma^{2q-1} = Z_1 ... Z_{q-1} X_q / sqrt(2)
    gamma^{2q}   = Z_1 ... Z_{q-1} Y_q / sqrt(2)

A :class:`PauliTerm` ``(x, z, c)`` denotes ``c * prod_q i^{x_q z_q} X_q^{x_q} Z_q^{z_q}``,
i.e. ``Y`` wherever both bits are set. On a basis state ``|b>`` it gives
``c * i^{|x & z|} * (-1)^{|z & b|} |b ^ x>``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator

from .couplings import CouplingSet
from .errors import CapabilityError, ValidationError
from .graphgen import Graph

_I_POWERS = (1, 1j, -1, -1j)
SECTORS = ("even", "odd")
ORACLE_MAX_SITES = 24


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class PauliTerm:
    x_mask: int
    z_mask: int
    coefficient: complex = 1.0

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        x1, z1, x2, z2 = self.x_mask, self.z_mask, other.x_mask, other.z_mask
        x, z = x1 ^ x2, z1 ^ z2
        # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1, then re-absorb the Y phases
        k = _popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x & z)
        return PauliTerm(x, z, self.coefficient * other.coefficient * _I_POWERS[k % 4])

    def scaled(self, factor) -> "PauliTerm":
        return PauliTerm(self.x_mask, self.z_mask, self.coefficient * factor)

    def commutes_with_parity(self) -> bool:
        return _popcount(self.x_mask) % 2 == 0

    def label(self, n_qubits: int) -> str:
        ops = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        return "".join(ops[(self.x_mask >> q) & 1, (self.z_mask >> q) & 1] for q in range(n_qubits))


def majorana_pauli(i: int) -> PauliTerm:
    """Unnormalised Pauli string of ``gamma^i`` (so ``gamma^i = P / sqrt(2)``)."""
    if i < 1:
        raise ValidationError(f"Majorana labels start at 1, got {i}")
    q = (i - 1) // 2
    string = (1 << q) - 1
    x = 1 << q
    z = string | (x if i % 2 == 0 else 0)
    return PauliTerm(x, z, 1.0)


def majorana_monomial(sites, coefficient: complex = 1.0) -> PauliTerm:
    """``coefficient * gamma^{s1} gamma^{s2} ...`` as a single Pauli term.

    The ``2^{-m/2}`` normalisation is applied exactly when ``m`` is even.
    """
    term = PauliTerm(0, 0, 1.0)
    for s in sites:
        term = term * majorana_pauli(s)
    m = len(sites)
    norm = 0.5 ** (m // 2) if m % 2 == 0 else 0.5 ** (m / 2)
    return term.scaled(coefficient * norm)


def majorana_term(i: int, j: int, J: float) -> PauliTerm:
    """``-i J gamma^i gamma^j`` for ``1 <= i < j``; Hermitian, so the coefficient is real."""
    if not 1 <= i < j:
        raise ValidationError(f"need 1 <= i < j, got ({i}, {j})")
    t = majorana_monomial((i, j), -1j * J)
    return PauliTerm(t.x_mask, t.z_mask, complex(t.coefficient).real)


def impurity_term(n_sites: int = 4, sites=(1, 2, 3, 4)) -> PauliTerm:
    """``gamma^1 gamma^2 gamma^3 gamma^4``, equal to ``-Z_1 Z_2 / 4``."""
    if n_sites < 4:
        raise ValidationError(f"impurity needs N >= 4, got {n_sites}")
    t = majorana_monomial(sites)
    return PauliTerm(t.x_mask, t.z_mask, complex(t.coefficient).real)


def pauli_matrix(term: PauliTerm, n_qubits: int) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a term on the full Hilbert space."""
    dim = 1 << n_qubits
    b = np.arange(dim, dtype=np.int64)
    sign = 1 - 2 * (np.bitwise_count(b & term.z_mask).astype(np.int64) & 1)
    phase = term.coefficient * _I_POWERS[_popcount(term.x_mask & term.z_mask) % 4]
    M = np.zeros((dim, dim), dtype=np.complex128)
    M[b ^ term.x_mask, b] = phase * sign
    return M


def majorana_matrix(i: int, n_sites: int, normalized: bool = True) -> np.ndarray:
    """Explicit matrix of ``gamma^i`` (or of its Pauli string when ``normalized=False``)."""
    M = pauli_matrix(majorana_pauli(i), n_sites // 2)
    return M / np.sqrt(2.0) if normalized else M


def hamiltonian_terms(g: Graph, c: CouplingSet, impurity: bool = True) -> list[PauliTerm]:
    """One term per edge (in edge order), then the impurity if requested."""
    if len(c.values) != g.n_edges:
        raise ValidationError(f"{len(c.values)} couplings for {g.n_edges} edges")
    terms = [majorana_term(int(u) + 1, int(v) + 1, float(J)) for (u, v), J in zip(g.edges, c.values)]
    if impurity:
        terms.append(impurity_term(g.n_vertices))
    return terms


def sector_basis(n_qubits: int, sector: str = "even") -> np.ndarray:
    """Basis states of fixed popcount parity, ascending; state ``b`` sits at row ``b >> 1``."""
    if sector not in SECTORS:
        raise ValidationError(f"sector must be 'even' or 'odd', got {sector!r}")
    high = np.arange(1 << (n_qubits - 1), dtype=np.int64) << 1
    low = (np.bitwise_count(high).astype(np.int64) & 1) ^ (sector == "odd")
    return high | low


def _grouped_terms(terms):
    groups: dict[int, list[PauliTerm]] = {}
    for t in terms:
        if not t.commutes_with_parity():
            raise ValidationError(f"term {t} does not conserve fermion parity")
        groups.setdefault(t.x_mask, []).append(t)
    return groups


def _group_values(group, states: np.ndarray) -> np.ndarray:
    vals = np.zeros(len(states), dtype=np.complex128)
    for t in group:
        phase = t.coefficient * _I_POWERS[_popcount(t.x_mask & t.z_mask) % 4]
        vals += phase * (1 - 2 * (np.bitwise_count(states & t.z_mask).astype(np.int64) & 1))
    return vals


@dataclass(eq=False)
class SparseHamiltonian:
    """Many-body Hamiltonian restricted to one parity sector, stored as CSR."""

    matrix: sparse.csr_matrix
    n_sites: int
    sector: str
    impurity: bool = True
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, x):
        return self.matrix @ x

    def max_row_nnz(self) -> int:
        return int(np.max(np.diff(self.matrix.indptr)))

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def assemble_hamiltonian(
    g: Graph,
    c: CouplingSet,
    impurity: bool = True,
    sector: str = "even",
    metadata: dict | None = None,
) -> SparseHamiltonian:
    """Sum of edge terms (plus the impurity) on the chosen parity sector.

    Terms sharing an ``x_mask`` share a sparsity pattern, so each row holds at
    most one entry per distinct flip pattern.
    """
    n = g.n_vertices
    if n % 2 or n < 2:
        raise ValidationError(f"N must be even, got {n}")
    if impurity and n < 4:
        raise ValidationError("impurity needs N >= 4")
    states = sector_basis(n // 2, sector)
    dim = len(states)
    groups = _grouped_terms(hamiltonian_terms(g, c, impurity))

    rows, cols, vals = [], [], []
    cols_all = np.arange(dim, dtype=np.int64)
    for x in sorted(groups):
        rows.append((states ^ x) >> 1)
        cols.append(cols_all)
        vals.append(_group_values(groups[x], states))
    m = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    m.sort_indices()
    meta = {"N": n, "sector": sector, "impurity": bool(impurity), "coupling_seed": c.seed}
    if g.spec is not None:
        meta.update(k=g.spec.k, p=g.spec.p, graph_seed=g.spec.seed)
    meta.update(metadata or {})
    return SparseHamiltonian(m, n, sector, bool(impurity), meta)


class SectorOperator(LinearOperator):
    """Matrix-free version of :func:`assemble_hamiltonian` (for ``N >= 36``).

    Phases are recomputed on every product; only the basis and term list are kept.
    """

    def __init__(self, g: Graph, c: CouplingSet, impurity: bool = True, sector: str = "even"):
        n = g.n_vertices
        if impurity and n < 4:
            raise ValidationError("impurity needs N >= 4")
        self.n_sites = n
        self.sector = sector
        self.states = sector_basis(n // 2, sector)
        self.groups = _grouped_terms(hamiltonian_terms(g, c, impurity))
        dim = len(self.states)
        super().__init__(dtype=np.complex128, shape=(dim, dim))

    def _matmat(self, X):
        X = np.asarray(X)
        Y = np.zeros((self.shape[0], X.shape[1]), dtype=np.complex128)
        for x in sorted(self.groups):
            vals = _group_values(self.groups[x], self.states)
            Y[(self.states ^ x) >> 1] += vals[:, None] * X
        return Y

    def _matvec(self, v):
        return self._matmat(np.asarray(v).reshape(-1, 1)).ravel()

    def _adjoint(self):
        return self


def quadratic_spectrum_oracle(h: np.ndarray, sector: str = "even") -> np.ndarray:
    """Exact free-fermion many-body spectrum of ``h = iJ`` in one parity sector.

    Levels are ``sum_k sigma_k eps_k / 2`` with ``sigma_k = +-1``; a
    configuration lies in the even sector when ``prod sigma_k = det(O)`` for
    the Bogoliubov rotation ``O``. Exponential in ``N``: capped at
    ``N = 24``.
    """
    from .dyson import bogoliubov

    if sector not in SECTORS:
        raise ValidationError(f"sector must be 'even' or 'odd', got {sector!r}")
    h = np.asarray(h)
    n = h.shape[0]
    if n % 2:
        raise ValidationError("N must be even")
    if n > ORACLE_MAX_SITES:
        raise CapabilityError(f"free-fermion enumeration capped at N={ORACLE_MAX_SITES}, got {n}")
    J = np.imag(h)
    fac = bogoliubov(J)
    ref = 1 if np.linalg.det(fac.O) > 0 else -1
    m = n // 2
    configs = np.arange(1 << m, dtype=np.int64)
    bits = (configs[:, None] >> np.arange(m)) & 1
    sigma = 1 - 2 * bits
    energies = 0.5 * sigma @ fac.eps
    prod = np.prod(sigma, axis=1)
    want = ref if sector == "even" else -ref
    return np.sort(energies[prod == want])


_DUMP_MAGIC = b"DCSR0001"
_DUMP_HEADER = struct.Struct("<8sqqdQQBBqq")


def dump_hamiltonian(H: SparseHamiltonian, path) -> None:
    """Binary CSR dump, little-endian.

    Header: magic ``DCSR0001``, N, k, p, graph seed, coupling seed,
    sector (0 even / 1 odd), impurity flag, D, nnz. Then ``indptr`` (int64,
    D + 1), ``indices`` (int64, nnz), ``data`` (complex128, nnz).
    """
    m = H.matrix
    md = H.metadata
    header = _DUMP_HEADER.pack(
        _DUMP_MAGIC, H.n_sites, int(md.get("k", 0)), float(md.get("p", 0.0)),
        int(md.get("graph_seed", 0)), int(md.get("coupling_seed", 0)),
        SECTORS.index(H.sector), int(H.impurity), H.dimension, m.nnz,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(m.indptr.astype("<i8").tobytes())
        f.write(m.indices.astype("<i8").tobytes())
        f.write(m.data.astype("<c16").tobytes())


def load_hamiltonian(path) -> SparseHamiltonian:
    with open(path, "rb") as f:
        raw = f.read()
    magic, n, k, p, gseed, cseed, sec, imp, dim, nnz = _DUMP_HEADER.unpack_from(raw)
    if magic != _DUMP_MAGIC:
        raise ValidationError(f"{path}: not a Hamiltonian dump")
    off = _DUMP_HEADER.size
    indptr = np.frombuffer(raw, "<i8", dim + 1, off)
    off += 8 * (dim + 1)
    indices = np.frombuffer(raw, "<i8", nnz, off)
    off += 8 * nnz
    data = np.frombuffer(raw, "<c16", nnz, off)
    m = sparse.csr_matrix((data.copy(), indices.copy(), indptr.copy()), shape=(dim, dim))
    meta = {"N": n, "k": k, "p": p, "graph_seed": gseed, "coupling_seed": cseed,
            "sector": SECTORS[sec], "impurity": bool(imp)}
    return SparseHamiltonian(m, n, SECTORS[sec], bool(imp), meta)
