"""Single-particle side of the model: canonical form of ``J`` and the rotated impurity.

With ``chi = O @ gamma`` the quadratic part becomes
``-i sum_k eps_k chi_{2k} chi_{2k+1}`` (0-based), and the quartic impurity on
sites ``s1..s4`` becomes ``sum_{a<b<c<d} T_abcd chi_a chi_b chi_c chi_d`` with
``T_abcd = det(O[[a, b, c, d]][:, sites])``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, islice
from math import comb

import numpy as np

from .couplings import CouplingSet, coupling_matrix
from .errors import ValidationError
from .graphgen import Graph
from .stats import RStatistics, single_particle_r_values

DEGENERACY_TOL = 1e-10


@dataclass(eq=False)
class BogoliubovFactorization:
    """Orthogonal ``O`` with ``O J O.T = blockdiag([[0, eps_k], [-eps_k, 0]])``."""

    O: np.ndarray
    eps: np.ndarray

    def canonical_matrix(self) -> np.ndarray:
        n = self.O.shape[0]
        B = np.zeros((n, n))
        idx = np.arange(0, n, 2)
        B[idx, idx + 1] = self.eps
        B[idx + 1, idx] = -self.eps
        return B


def _fix_plane_gauge(o1: np.ndarray, o2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Rotate within the plane so o1 carries all of the weight at the plane's
    # heaviest site (first one on ties), with a positive sign.
    m = int(np.argmax(o1 * o1 + o2 * o2))
    r = np.hypot(o1[m], o2[m])
    c, s = o1[m] / r, o2[m] / r
    return c * o1 + s * o2, -s * o1 + c * o2


def bogoliubov(J: np.ndarray, tol: float = 1e-12) -> BogoliubovFactorization:
    """Canonical form of a real antisymmetric matrix via the Hermitian problem ``iJ``.

    Eigenvectors ``a + ib`` of ``iJ`` at ``+eps`` give real planes
    ``span(a, b)``. Within each (near-)degenerate group the real span is
    re-orthonormalised and split into planes ``(o1, -J o1 / eps)``, which makes
    the pairing well defined under degeneracy. ``eps`` is ascending.
    """
    J = np.asarray(J, dtype=np.float64)
    n = J.shape[0]
    if J.shape != (n, n) or n % 2:
        raise ValidationError(f"J must be square with even size, got shape {J.shape}")
    if np.max(np.abs(J + J.T), initial=0.0) > tol:
        raise ValidationError("J is not antisymmetric within tolerance")
    J = 0.5 * (J - J.T)

    w, V = np.linalg.eigh(1j * J)
    # eigh sorts ascending: the upper half holds the non-negative levels
    eps = np.clip(w[n // 2:], 0.0, None)
    Vpos = V[:, n // 2:]
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))

    rows = []
    start = 0
    while start < n // 2:
        stop = start + 1
        while stop < n // 2 and eps[stop] - eps[stop - 1] <= DEGENERACY_TOL * scale:
            stop += 1
        e = float(np.mean(eps[start:stop]))
        zero_mode = e <= DEGENERACY_TOL * scale
        if zero_mode:
            # the kernel needs both halves: one half alone may span only part of it
            group = V[:, np.abs(w) <= DEGENERACY_TOL * scale]
        else:
            group = Vpos[:, start:stop]
        span = np.concatenate([group.real, group.imag], axis=1)
        if rows:
            prev = np.array(rows)
            span -= prev.T @ (prev @ span)
        U, s, _ = np.linalg.svd(span, full_matrices=False)
        basis = U[:, : 2 * (stop - start)]
        planes = []
        for col in range(basis.shape[1]):
            if len(planes) == stop - start:
                break
            o1 = basis[:, col].copy()
            for q1, q2 in planes:
                o1 -= q1 * (q1 @ o1) + q2 * (q2 @ o1)
            norm = np.linalg.norm(o1)
            if norm < 1e-6:
                continue
            o1 /= norm
            if zero_mode:
                # any orthonormal pairing of the kernel is canonical
                o2 = None
                for col2 in range(col + 1, basis.shape[1]):
                    cand = basis[:, col2] - o1 * (o1 @ basis[:, col2])
                    for q1, q2 in planes:
                        cand -= q1 * (q1 @ cand) + q2 * (q2 @ cand)
                    if np.linalg.norm(cand) > 1e-6:
                        o2 = cand / np.linalg.norm(cand)
                        break
                if o2 is None:
                    continue
            else:
                o2 = -(J @ o1) / e
                o2 -= o1 * (o1 @ o2)
                o2 /= np.linalg.norm(o2)
            planes.append(_fix_plane_gauge(o1, o2))
        for q1, q2 in planes:
            rows.extend([q1, q2])
        start = stop

    O = np.array(rows)
    # one last polish keeps O orthogonal to machine precision
    U, _, Vt = np.linalg.svd(O)
    O = U @ Vt
    return BogoliubovFactorization(O, eps)


@dataclass(eq=False)
class QuarticTensor:
    """Canonical (``a < b < c < d``) coefficients of a rotated quartic monomial."""

    indices: np.ndarray
    values: np.ndarray
    n_modes: int

    def __len__(self):
        return len(self.values)

    def norm2(self) -> float:
        return float(np.sum(self.values**2))


@lru_cache(maxsize=4)
def _quadruples(n: int) -> np.ndarray:
    flat = np.fromiter(
        (i for q in combinations(range(n), 4) for i in q), dtype=np.int32, count=4 * comb(n, 4)
    )
    return flat.reshape(-1, 4)


def _quadruple_chunks(n: int, chunk: int):
    if comb(n, 4) <= 2_000_000:
        quads = _quadruples(n)
        for s in range(0, len(quads), chunk):
            yield quads[s:s + chunk]
        return
    it = combinations(range(n), 4)
    while True:
        block = np.array(list(islice(it, chunk)), dtype=np.int32)
        if not len(block):
            return
        yield block


def rotate_quartic(
    O: np.ndarray,
    sites=(1, 2, 3, 4),
    *,
    threshold: float = 0.0,
    chunk: int = 262_144,
    tol: float = 1e-10,
) -> QuarticTensor:
    """Coefficient tensor of ``gamma^s1 gamma^s2 gamma^s3 gamma^s4`` in the rotated modes.

    ``sites`` are 1-based Majorana labels. ``T_abcd`` is the 4x4 minor of
    ``O[:, sites]`` on rows ``(a, b, c, d)``. Entries with ``|T| <= threshold``
    are dropped from the result (``threshold=0`` keeps everything, which is
    practical up to ``N`` of roughly 200).
    """
    O = np.asarray(O, dtype=np.float64)
    n = O.shape[0]
    if O.shape != (n, n) or np.max(np.abs(O @ O.T - np.eye(n))) > tol:
        raise ValidationError("O must be orthogonal within tolerance")
    cols = [s - 1 for s in sites]
    if len(set(cols)) != 4 or min(cols) < 0 or max(cols) >= n:
        raise ValidationError(f"sites must be four distinct labels in 1..{n}, got {sites}")
    A = O[:, cols]

    idx_parts, val_parts = [], []
    for quads in _quadruple_chunks(n, chunk):
        vals = np.linalg.det(A[quads])
        if threshold > 0.0:
            keep = np.abs(vals) > threshold
            quads, vals = quads[keep], vals[keep]
        idx_parts.append(quads)
        val_parts.append(vals)
    indices = np.concatenate(idx_parts) if idx_parts else np.empty((0, 4), dtype=np.int32)
    values = np.concatenate(val_parts) if val_parts else np.empty(0)
    return QuarticTensor(indices, values, n)


def extensivity_measures(T: QuarticTensor, tau: float = 1e-3) -> tuple[int, float]:
    """``(support_count, participation_ratio)`` of a quartic tensor.

    ``support_count`` counts entries above ``tau * max|T|``; the participation
    ratio ``(sum T^2)^2 / sum T^4`` is threshold free.
    """
    v = np.asarray(T.values)
    if v.size == 0 or not np.any(v):
        raise ValidationError("empty quartic tensor")
    a = np.abs(v)
    support = int(np.count_nonzero(a > tau * a.max()))
    v2 = v * v
    pr = float(np.sum(v2) ** 2 / np.sum(v2 * v2))
    return support, pr


def single_particle_spectrum(g: Graph, c: CouplingSet) -> np.ndarray:
    """All ``N`` eigenvalues of ``iJ``, ascending."""
    return np.linalg.eigvalsh(1j * coupling_matrix(g, c))


def single_particle_rstats(
    g: Graph,
    c: CouplingSet,
    fraction: float = 0.2,
    exclude_fraction: float = 0.01,
) -> RStatistics:
    """Mean r-ratio of one realization of the hopping problem ``iJ``.

    Uses the positive half of the spectrum with the smallest-``|E|`` levels
    excluded, then its rank-central ``fraction``.
    """
    levels = single_particle_spectrum(g, c)
    r, degenerate = single_particle_r_values(levels, fraction, exclude_fraction)
    mean_r = float(np.mean(r))
    return RStatistics(
        mean_r=mean_r,
        count=len(r),
        window_fraction=fraction,
        per_realization=[mean_r],
        degenerate_count=int(np.count_nonzero(degenerate)),
    )
