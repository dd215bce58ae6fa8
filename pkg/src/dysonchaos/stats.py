"""Level-spacing ratios, reference ensembles, histograms and localization measures."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Mean r-ratio of the standard ensembles.
POISSON = 0.38
GOE = 0.53
GUE = 0.60
GSE = 0.67
REFERENCE_VALUES = {"poisson": POISSON, "goe": GOE, "gue": GUE, "gse": GSE}
# Exact Poisson value 2 ln 2 - 1.
POISSON_EXACT = 2.0 * np.log(2.0) - 1.0


@dataclass
class RStatistics:
    mean_r: float
    count: int
    window_fraction: float
    per_realization: list[float] | None = None
    degenerate_count: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mean_r <= 1.0:
            raise ValidationError(f"mean_r outside [0, 1]: {self.mean_r}")
        if self.count < 1:
            raise ValidationError("RStatistics needs at least one r value")


def r_ratios(eigenvalues, return_flags: bool = False):
    """Ratios ``min(s_i, s_{i+1}) / max(s_i, s_{i+1})`` of consecutive spacings.

    A pair of zero spacings gives ``r = 1`` and is flagged as degenerate; a
    single zero spacing gives ``r = 0``.

    Parameters
    ----------
    eigenvalues : array_like
        Sorted ascending, at least three levels.
    return_flags : bool
        Also return the boolean mask of 0/0 pairs.
    """
    e = np.asarray(eigenvalues, dtype=np.float64)
    if e.ndim != 1 or e.size < 3:
        raise ValidationError("r_ratios needs at least 3 levels")
    s = np.diff(e)
    if np.any(s < 0):
        raise ValidationError("eigenvalues must be sorted ascending")
    lo = np.minimum(s[:-1], s[1:])
    hi = np.maximum(s[:-1], s[1:])
    degenerate = hi == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(degenerate, 1.0, lo / np.where(degenerate, 1.0, hi))
    return (r, degenerate) if return_flags else r


def central_levels(eigenvalues, fraction: float = 0.2) -> np.ndarray:
    """Rank-centred ``fraction`` of a sorted spectrum."""
    e = np.asarray(eigenvalues, dtype=np.float64)
    if not 0.0 < fraction <= 1.0:
        raise ValidationError(f"fraction must lie in (0, 1], got {fraction}")
    m = int(round(fraction * e.size))
    start = (e.size - m) // 2
    return e[start:start + m]


def mean_r_central(spectrum, fraction: float = 0.2) -> RStatistics:
    """Mean r-ratio over the central ``fraction`` of levels (by rank).

    ``spectrum`` is an array of sorted eigenvalues or a ``Spectrum``. A
    windowed (filtered) spectrum is used whole: the window already is the
    restriction.
    """
    window = getattr(spectrum, "window", "full")
    levels = np.asarray(getattr(spectrum, "eigenvalues", spectrum), dtype=np.float64)
    if window == "full" or window is None:
        levels = central_levels(levels, fraction)
    if levels.size < 3:
        raise ValidationError(f"only {levels.size} levels in the central window")
    r, deg = r_ratios(levels, return_flags=True)
    return RStatistics(float(np.mean(r)), int(r.size), fraction, degenerate_count=int(deg.sum()))


def single_particle_r_values(levels, fraction: float = 0.2, exclude_fraction: float = 0.01,
                             degeneracy_tol: float = 1e-10):
    """r-ratios of a ``+-``-paired single-particle spectrum.

    Only the positive half is used, minus its smallest ``exclude_fraction``
    of levels, then the rank-central ``fraction`` of what remains. Returns
    ``(r, degenerate_flags)``; a value is flagged when either of its spacings
    is below ``degeneracy_tol * max|E|``, i.e. numerically zero.
    """
    e = np.sort(np.asarray(levels, dtype=np.float64))
    pos = e[e.size // 2:]
    pos = pos[int(np.ceil(exclude_fraction * pos.size)):]
    sel = central_levels(pos, fraction)
    if sel.size < 3:
        raise ValidationError(f"only {sel.size} single-particle levels selected")
    r = r_ratios(sel)
    tiny = np.diff(sel) <= degeneracy_tol * np.abs(e).max(initial=0.0)
    return r, tiny[:-1] | tiny[1:]


def gue_sample(dim: int, seed: int):
    """Eigenvalues of a GUE matrix.

    Diagonal entries are real ``N(0, 1)``; off-diagonal entries are complex
    with independent real and imaginary parts of variance 1/2, so
    ``E|H_ij|^2 = 1``.
    """
    from .eigensolve import Spectrum

    if dim < 2:
        raise ValidationError("GUE sample needs dim >= 2")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (a + a.conj().T) / 2.0
    return Spectrum(np.linalg.eigvalsh(h), metadata={"method": "gue", "seed": int(seed), "dim": dim})


def poisson_levels(n: int, seed: int) -> np.ndarray:
    """``n`` sorted independent uniform levels on ``[0, 1)``."""
    return np.sort(np.random.default_rng(seed).random(n))


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    below: int = 0
    above: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def histogram(values, bin_count: int, range: tuple[float, float]) -> Histogram:
    """Equal-width histogram; bins are left-closed, the last bin is closed on both ends.

    Values outside ``range`` are not binned and are counted in ``below`` / ``above``.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValidationError("histogram of an empty sample")
    lo, hi = float(range[0]), float(range[1])
    if bin_count < 1 or not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValidationError("need bin_count >= 1 and a finite range with lo < hi")
    counts, edges = np.histogram(v, bins=bin_count, range=(lo, hi))
    return Histogram(edges, counts, int(np.sum(v < lo)), int(np.sum(v > hi)))


def ipr(vector, tol: float = 1e-10) -> float:
    """Inverse participation ratio ``sum |psi|^4`` of a normalised vector."""
    p = np.abs(np.asarray(vector)) ** 2
    if abs(p.sum() - 1.0) > tol:
        raise ValidationError("vector is not normalised")
    return float(np.sum(p * p))
