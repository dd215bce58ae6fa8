"""Dense diagonalization and Chebyshev filter diagonalization of interior windows.

The filter path follows the usual recipe: estimate spectral bounds, map the
operator onto ``[-1, 1]``, expand the indicator of the target window in
Chebyshev polynomials (damped by a kernel), and run subspace iteration with
the filter followed by Rayleigh-Ritz.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .errors import CapabilityError, ConvergenceError, ValidationError

DENSE_CAP = 1 << 14
KERNELS = ("jackson", "lanczos", "flat")


@dataclass
class SpectralWindow:
    """Either a centred fraction of the spectral span or explicit ``[lo, hi]``."""

    center_fraction: float = 0.2
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if (self.lo is None) != (self.hi is None):
            raise ValidationError("give both lo and hi, or neither")
        if self.lo is not None and not self.lo < self.hi:
            raise ValidationError(f"empty window [{self.lo}, {self.hi}]")
        if self.lo is None and not 0.0 < self.center_fraction <= 1.0:
            raise ValidationError(f"center_fraction must lie in (0, 1], got {self.center_fraction}")

    def resolve(self, bounds) -> tuple[float, float]:
        if self.lo is not None:
            return float(self.lo), float(self.hi)
        lmin, lmax = bounds
        c, half = 0.5 * (lmin + lmax), 0.5 * (lmax - lmin) * self.center_fraction
        return c - half, c + half


@dataclass
class FilterConfig:
    polynomial_degree: int = 256
    block_size: int = 16
    damping: str = "jackson"
    residual_tol: float = 1e-8
    max_iterations: int = 60
    bound_margin: float = 0.01
    count_probes: int = 16
    max_degree: int = 1 << 14

    def __post_init__(self):
        if self.polynomial_degree < 1 or self.block_size < 1 or self.max_iterations < 1:
            raise ValidationError("degree, block_size and max_iterations must be positive")
        if self.damping not in KERNELS:
            raise ValidationError(f"unknown damping kernel {self.damping!r}")


@dataclass(eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    residuals: np.ndarray | None = None
    window: object = "full"
    metadata: dict = field(default_factory=dict)
    converged: bool = True
    count_estimate: float | None = None

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64)
        if np.any(np.diff(self.eigenvalues) < 0):
            order = np.argsort(self.eigenvalues, kind="stable")
            self.eigenvalues = self.eigenvalues[order]
            if self.residuals is not None:
                self.residuals = np.asarray(self.residuals)[order]

    def __len__(self):
        return len(self.eigenvalues)


def _operator(H) -> LinearOperator:
    if hasattr(H, "matrix") and sparse.issparse(H.matrix):
        return aslinearoperator(H.matrix)
    return aslinearoperator(H)


def _explicit(H):
    if hasattr(H, "matrix") and sparse.issparse(H.matrix):
        return H.matrix
    if sparse.issparse(H) or isinstance(H, np.ndarray):
        return H
    return None


def dense_eigh(H, cap: int = DENSE_CAP, n_check: int = 10, seed: int = 0) -> Spectrum:
    """All eigenvalues of a Hermitian operator by dense diagonalization.

    The residual of ``n_check`` randomly chosen eigenpairs is recorded in
    ``metadata['max_sampled_residual']``.
    """
    M = _explicit(H)
    if M is None:
        raise CapabilityError("dense_eigh needs an explicit matrix")
    dim = M.shape[0]
    if dim > cap:
        raise CapabilityError(f"dimension {dim} exceeds the dense cap {cap}; use filter_diagonalize")
    A = M.toarray() if sparse.issparse(M) else np.asarray(M)
    w, V = np.linalg.eigh(A)
    picks = np.random.default_rng(seed).choice(dim, size=min(n_check, dim), replace=False)
    res = np.linalg.norm(A @ V[:, picks] - V[:, picks] * w[picks], axis=0)
    meta = dict(getattr(H, "metadata", {}) or {})
    meta.update(method="dense", max_sampled_residual=float(res.max(initial=0.0)),
                operator_norm=float(np.max(np.abs(w), initial=0.0)))
    return Spectrum(w, window="full", metadata=meta)


def _lanczos_extremes(op, steps: int, rng) -> tuple[float, float, bool]:
    dim = op.shape[0]
    m = min(steps, dim)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    Q = np.zeros((dim, m), dtype=np.complex128)
    alpha, beta = np.zeros(m), np.zeros(m)
    breakdown = False
    j = 0
    for j in range(m):
        Q[:, j] = v
        w = op.matvec(v)
        alpha[j] = np.vdot(v, w).real
        # full reorthogonalisation, twice
        for _ in range(2):
            w = w - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
        beta[j] = np.linalg.norm(w)
        scale = max(abs(alpha[j]), beta[j - 1] if j else 0.0, 1e-300)
        if beta[j] <= 1e-12 * scale:
            breakdown = True
            break
        v = w / beta[j]
    k = j + 1
    T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
    theta, S = np.linalg.eigh(T)
    tail = 0.0 if breakdown else beta[k - 1]
    lo = theta[0] - abs(tail * S[-1, 0])
    hi = theta[-1] + abs(tail * S[-1, -1])
    return lo, hi, breakdown


def spectral_bounds(H, margin: float = 0.01, steps: int = 40, seed: int = 0) -> tuple[float, float]:
    """Interval containing the spectrum of a Hermitian operator.

    Extremal Ritz values of a short Lanczos run (plus their residual bounds)
    are inflated by ``margin`` times the span. On Lanczos breakdown a second
    start vector is tried and the two estimates are merged. When the matrix is
    explicit the result is also clipped to the Gershgorin interval.
    """
    op = _operator(H)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xB0])))
    lo, hi, broke = _lanczos_extremes(op, steps, rng)
    if broke:
        lo2, hi2, _ = _lanczos_extremes(op, steps, rng)
        lo, hi = min(lo, lo2), max(hi, hi2)
    pad = max(margin * (hi - lo), 1e-8 * max(1.0, abs(lo), abs(hi)))
    lo, hi = lo - pad, hi + pad
    M = _explicit(H)
    if M is not None:
        A = abs(M)
        radius = np.asarray(A.sum(axis=1)).ravel()
        lo, hi = max(lo, -radius.max()), min(hi, radius.max())
    return float(lo), float(hi)


def kernel_coefficients(degree: int, damping: str = "jackson") -> np.ndarray:
    """Damping factors ``g_0..g_degree``."""
    n = np.arange(degree + 1)
    M = degree + 1
    if damping == "jackson":
        a = np.pi / M
        return ((M - n) * np.cos(a * n) + np.sin(a * n) / np.tan(a)) / M
    if damping == "lanczos":
        return np.sinc(n / M)
    if damping == "flat":
        return np.ones(degree + 1)
    raise ValidationError(f"unknown damping kernel {damping!r}")


def window_coefficients(a: float, b: float, degree: int, damping: str = "jackson") -> np.ndarray:
    """Damped Chebyshev coefficients of the indicator of ``[a, b]`` within ``[-1, 1]``."""
    if not -1.0 <= a < b <= 1.0:
        raise ValidationError(f"scaled window [{a}, {b}] not inside [-1, 1]")
    n = np.arange(1, degree + 1)
    ta, tb = np.arccos(a), np.arccos(b)
    c = np.empty(degree + 1)
    c[0] = (ta - tb) / np.pi
    c[1:] = 2.0 * (np.sin(n * ta) - np.sin(n * tb)) / (n * np.pi)
    return c * kernel_coefficients(degree, damping)


def _scaled_window(bounds, window) -> tuple[float, float, float, float]:
    lmin, lmax = bounds
    lo, hi = window
    if not (lmin <= lo < hi <= lmax):
        raise ValidationError(f"window [{lo}, {hi}] not inside bounds [{lmin}, {lmax}]")
    c, h = 0.5 * (lmin + lmax), 0.5 * (lmax - lmin)
    return (lo - c) / h, (hi - c) / h, c, h


def chebyshev_filter_apply(H, bounds, window, degree: int, damping: str, X) -> np.ndarray:
    """Apply the damped window-indicator polynomial of ``H`` to the columns of ``X``.

    Three-term recurrence, one block product per degree.
    """
    a, b, c, h = _scaled_window(bounds, window)
    coef = window_coefficients(a, b, degree, damping)
    op = _operator(H)
    X = np.asarray(X, dtype=np.complex128)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[:, None]

    def Ht(V):
        return (op.matmat(V) - c * V) / h

    t_prev = X
    Y = coef[0] * t_prev
    if degree >= 1:
        t_cur = Ht(X)
        Y = Y + coef[1] * t_cur
        for k in range(2, degree + 1):
            t_prev, t_cur = t_cur, 2.0 * Ht(t_cur) - t_prev
            Y += coef[k] * t_cur
    return Y[:, 0] if squeeze else Y


def estimate_window_count(H, bounds, window, degree: int, damping: str = "jackson",
                          probes: int = 16, seed: int = 0) -> float:
    """Stochastic trace of the window filter (random-phase probes)."""
    op = _operator(H)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xC0])))
    R = np.exp(2j * np.pi * rng.random((op.shape[0], probes)))
    Y = chebyshev_filter_apply(op, bounds, window, degree, damping, R)
    return float(np.mean(np.einsum("ij,ij->j", R.conj(), Y).real))


def _orthonormal_basis(Y: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    U, s, _ = np.linalg.svd(Y, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return U[:, :0]
    return U[:, s > rtol * s[0]]


def _random_block(rng, dim, cols):
    return rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))


def filter_diagonalize(H, window: SpectralWindow | None = None, cfg: FilterConfig | None = None,
                       seed: int = 0, require_convergence: bool = False) -> Spectrum:
    """Eigenvalues of ``H`` inside an interior window.

    Subspace iteration: filter the block, orthonormalise, Rayleigh-Ritz,
    carry the Ritz vectors over and top the block up with fresh random
    columns. A run is complete when the number of converged Ritz pairs inside
    the window is unchanged from the previous iteration and no other in-window
    pair is still plausibly converging (residual below its distance to the
    window edge). The block doubles when the window fills most of it; the
    degree doubles when the converged count stops improving.
    """
    window = window or SpectralWindow()
    cfg = cfg or FilterConfig()
    op = _operator(H)
    dim = op.shape[0]
    bounds = spectral_bounds(H, cfg.bound_margin, seed=seed)
    lo, hi = window.resolve(bounds)
    if not bounds[0] < lo < hi < bounds[1]:
        raise ValidationError(f"window [{lo}, {hi}] not strictly inside bounds {bounds}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xF1])))
    tol = cfg.residual_tol * max(1.0, abs(bounds[0]), abs(bounds[1]))
    degree = cfg.polynomial_degree

    count_est = estimate_window_count(op, bounds, (lo, hi), degree, cfg.damping, cfg.count_probes, seed)
    block = int(min(dim, max(cfg.block_size, np.ceil(1.5 * max(count_est, 0.0)) + 8)))
    X = _random_block(rng, dim, block)

    prev_count = None
    best_conv = -1
    stalls = 0
    complete = False
    theta = res = np.empty(0)
    inside = np.zeros(0, dtype=bool)
    history = []
    for iteration in range(cfg.max_iterations):
        Y = chebyshev_filter_apply(op, bounds, (lo, hi), degree, cfg.damping, X)
        Q = _orthonormal_basis(Y)
        HQ = op.matmat(Q)
        G = Q.conj().T @ HQ
        theta, S = np.linalg.eigh(0.5 * (G + G.conj().T))
        V = Q @ S
        res = np.linalg.norm(HQ @ S - V * theta, axis=0)
        inside = (theta >= lo) & (theta <= hi)
        conv = inside & (res <= tol)
        # an unconverged pair whose residual exceeds its distance to the window
        # edge may consist entirely of eigenvectors outside the window
        edge_gap = np.minimum(theta - lo, hi - theta)
        pending = inside & ~conv & (res <= edge_gap)
        n_in = int(inside.sum())
        n_conv = int(conv.sum())
        history.append((degree, block, n_in, n_conv))

        if Q.shape[1] == dim:
            # the block spans the whole space: Rayleigh-Ritz is exact
            complete = True
            break
        slack = max(4, block // 5)
        if n_in > block - slack and block < dim:
            block = min(dim, 2 * block)
            prev_count = None
            X = np.concatenate([V, _random_block(rng, dim, block - V.shape[1])], axis=1)
            continue
        settled = not pending.any()
        if settled and prev_count == n_conv:
            complete = True
            break
        prev_count = n_conv if settled else None
        if n_conv > best_conv:
            best_conv, stalls = n_conv, 0
        else:
            stalls += 1
            if stalls >= 2:
                if degree < cfg.max_degree:
                    degree = min(cfg.max_degree, 2 * degree)
                elif block < dim:
                    block = min(dim, 2 * block)
                stalls = 0
        X = np.concatenate([V, _random_block(rng, dim, max(0, block - V.shape[1]))], axis=1)

    keep = inside if Q.shape[1] == dim else inside & (res <= tol)
    meta = dict(getattr(H, "metadata", {}) or {})
    meta.update(method="filter", bounds=bounds, degree=degree, block=block, seed=int(seed),
                damping=cfg.damping, iterations=len(history), complete=complete)
    spec = Spectrum(theta[keep], residuals=res[keep], window=(lo, hi), metadata=meta,
                    converged=complete, count_estimate=count_est)
    if require_convergence and not complete:
        raise ConvergenceError(f"filter diagonalization incomplete after {cfg.max_iterations} iterations")
    return spec
