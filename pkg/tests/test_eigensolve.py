import numpy as np
import pytest
from scipy import integrate, sparse

from dysonchaos.couplings import single_particle_matrix
from dysonchaos.eigensolve import (
    FilterConfig,
    SpectralWindow,
    Spectrum,
    chebyshev_filter_apply,
    dense_eigh,
    filter_diagonalize,
    kernel_coefficients,
    spectral_bounds,
    window_coefficients,
    _orthonormal_basis,
)
from dysonchaos.errors import CapabilityError, ValidationError
from dysonchaos.fermion import SectorOperator, assemble_hamiltonian, quadratic_spectrum_oracle
from dysonchaos.graphgen import GraphSpec, base_circulant

from conftest import random_instance, zero_couplings


def impurity_only(n=12):
    g = base_circulant(GraphSpec(n, 2, 0.0))
    return assemble_hamiltonian(g, zero_couplings(g), impurity=True)


def cheb_eval(coef, x):
    return np.polynomial.chebyshev.chebval(x, coef)


# ---------------------------------------------------------------- dense


def test_dense_diag():
    s = dense_eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.array_equal(s.eigenvalues, [1.0, 2.0, 3.0])
    assert s.window == "full"


def test_dense_impurity_only():
    H = impurity_only(12)
    s = dense_eigh(H)
    D = H.dimension
    assert np.allclose(s.eigenvalues, [-0.25] * (D // 2) + [0.25] * (D // 2), atol=1e-14)


def test_dense_quadratic_matches_oracle():
    g, c = random_instance(12, 0.4, 5, 6)
    s = dense_eigh(assemble_hamiltonian(g, c, impurity=False))
    oracle = quadratic_spectrum_oracle(single_particle_matrix(g, c))
    assert np.abs(s.eigenvalues - oracle).max() < 1e-10


def test_dense_residuals_recorded():
    g, c = random_instance(16, 0.4, 5, 6)
    s = dense_eigh(assemble_hamiltonian(g, c))
    assert s.metadata["max_sampled_residual"] <= 1e-10 * s.metadata["operator_norm"]


def test_dense_cap():
    with pytest.raises(CapabilityError):
        dense_eigh(impurity_only(12), cap=16)
    with pytest.raises(CapabilityError):
        g, c = random_instance(12, 0.4, 5, 6)
        dense_eigh(SectorOperator(g, c))


# ---------------------------------------------------------------- bounds


def test_bounds_diag():
    lo, hi = spectral_bounds(sparse.diags([-1.0, 0.0, 2.0]))
    assert lo <= -1.0 and hi >= 2.0


def test_bounds_impurity_only():
    lo, hi = spectral_bounds(impurity_only())
    assert lo <= -0.25 and hi >= 0.25


@pytest.mark.parametrize("seed", range(3))
def test_bounds_contain_dense_spectrum(seed):
    g, c = random_instance(16, 0.5, seed, seed)
    H = assemble_hamiltonian(g, c)
    w = dense_eigh(H).eigenvalues
    lo, hi = spectral_bounds(H, seed=seed)
    assert lo <= w[0] and hi >= w[-1]
    # matrix-free path has no Gershgorin clip but must still contain it
    lo, hi = spectral_bounds(SectorOperator(g, c), seed=seed)
    assert lo <= w[0] and hi >= w[-1]


def test_bounds_deterministic():
    g, c = random_instance(14, 0.5, 1, 1)
    H = assemble_hamiltonian(g, c)
    assert spectral_bounds(H, seed=4) == spectral_bounds(H, seed=4)


# ---------------------------------------------------------------- filter polynomial


@pytest.mark.parametrize("a,b", [(-0.2, 0.2), (0.1, 0.7), (-1.0, -0.5)])
def test_window_coefficients_match_quadrature(a, b):
    # c_n = (2 - delta_n0)/pi * int_a^b T_n(x) / sqrt(1 - x^2) dx, via x = cos(t)
    degree = 12
    c = window_coefficients(a, b, degree, "flat")
    for n in range(degree + 1):
        val, _ = integrate.quad(lambda t: np.cos(n * t), np.arccos(b), np.arccos(a))
        ref = (1 if n == 0 else 2) / np.pi * val
        assert abs(c[n] - ref) < 1e-12


def test_kernels():
    assert np.array_equal(kernel_coefficients(5, "flat"), np.ones(6))
    g = kernel_coefficients(64, "jackson")
    assert g[0] == pytest.approx(1.0) and np.all(np.diff(g) <= 1e-15) and g[-1] >= 0
    assert kernel_coefficients(8, "lanczos")[0] == 1.0
    with pytest.raises(ValidationError):
        kernel_coefficients(8, "boxcar")


def test_scalar_amplification_example():
    # diag {0.1, 0.5, 0.9} with bounds [0, 1]: scaled points -0.8, 0, 0.8; window [-0.2, 0.2]
    coef = window_coefficients(-0.2, 0.2, 200, "jackson")
    p = np.abs(cheb_eval(coef, np.array([-0.8, 0.0, 0.8])))
    assert p[1] / max(p[0], p[2]) >= 1e3


def test_filter_apply_amplification():
    H = sparse.diags([0.1, 0.5, 0.9])
    Y = chebyshev_filter_apply(H, (0.0, 1.0), (0.4, 0.6), 200, "jackson", np.ones(3))
    assert abs(Y[1]) / max(abs(Y[0]), abs(Y[2])) >= 1e3


def test_degree_zero_flat_is_scaling(rng):
    H = sparse.diags(rng.standard_normal(20))
    X = rng.standard_normal((20, 3))
    Y = chebyshev_filter_apply(H, (-5.0, 5.0), (-1.0, 2.0), 0, "flat", X)
    ratio = Y / X
    assert np.allclose(ratio, ratio[0, 0], rtol=1e-14)


def test_eigenvector_invariance():
    g, c = random_instance(12, 0.5, 2, 2)
    H = assemble_hamiltonian(g, c)
    w, V = np.linalg.eigh(H.toarray())
    bounds = spectral_bounds(H)
    window = (-0.3, 0.3)
    Y = chebyshev_filter_apply(H, bounds, window, 64, "jackson", V[:, :5])
    mid, half = 0.5 * (bounds[0] + bounds[1]), 0.5 * (bounds[1] - bounds[0])
    coef = window_coefficients((window[0] - mid) / half, (window[1] - mid) / half, 64)
    scale = cheb_eval(coef, (w[:5] - mid) / half)
    assert np.abs(Y - V[:, :5] * scale).max() < 1e-12


def test_filter_apply_linear(rng):
    g, c = random_instance(12, 0.5, 2, 2)
    H = assemble_hamiltonian(g, c)
    b = spectral_bounds(H)
    X1, X2 = rng.standard_normal((2, H.dimension, 2))
    f = lambda X: chebyshev_filter_apply(H, b, (-0.1, 0.1), 50, "jackson", X)
    assert np.allclose(f(2 * X1 - 3j * X2), 2 * f(X1) - 3j * f(X2), atol=1e-12)


def test_filter_window_outside_bounds():
    with pytest.raises(ValidationError):
        chebyshev_filter_apply(sparse.eye(3), (0.0, 1.0), (0.5, 1.5), 4, "flat", np.ones(3))


@pytest.mark.parametrize("degree", [32, 128, 512])
def test_center_dominates_outside(degree):
    a, b = -0.1, 0.1
    coef = window_coefficients(a, b, degree)
    x = np.linspace(-1, 1, 4001)
    p = cheb_eval(coef, x)
    outside = p[(x < a - 0.05) | (x > b + 0.05)]
    assert cheb_eval(coef, 0.0) >= np.abs(outside).max()


def test_suppression_grows_with_degree():
    x = np.linspace(-1, 1, 4001)
    far = (x < -0.3) | (x > 0.3)
    ratios = []
    for degree in (32, 128, 512):
        coef = window_coefficients(-0.1, 0.1, degree)
        ratios.append(cheb_eval(coef, 0.0) / np.abs(cheb_eval(coef, x[far])).max())
    assert ratios[0] < ratios[1] < ratios[2]


# ---------------------------------------------------------------- filter diagonalization


def test_filter_n16_matches_dense():
    g, c = random_instance(16, 0.5, 0, 0)
    H = assemble_hamiltonian(g, c)
    s = filter_diagonalize(H, SpectralWindow(0.2), seed=0)
    lo, hi = s.window
    w = dense_eigh(H).eigenvalues
    ref = w[(w >= lo) & (w <= hi)]
    assert s.converged and s.metadata["complete"]
    assert len(s) == len(ref) and np.abs(s.eigenvalues - ref).max() < 1e-8
    assert np.all(s.residuals <= 1e-8 * max(1.0, *map(abs, s.metadata["bounds"])))
    assert abs(s.count_estimate - len(ref)) < 0.25 * len(ref) + 3


def test_filter_whole_spectrum_64():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((64, 64))
    H = (A + A.T) / 2
    s = filter_diagonalize(H, SpectralWindow(0.999), FilterConfig(polynomial_degree=32), seed=1)
    w = np.linalg.eigvalsh(H)
    lo, hi = s.window
    assert lo < w[0] and hi > w[-1]
    assert len(s) == 64 and np.allclose(s.eigenvalues, w, atol=1e-10)


def test_filter_impurity_only_gap_is_empty():
    # all levels sit at +-1/4, nothing inside (-0.2, 0.2)
    s = filter_diagonalize(impurity_only(12), SpectralWindow(lo=-0.2, hi=0.2), seed=0)
    assert len(s) == 0 and s.converged


def test_filter_impurity_only_upper_window():
    H = impurity_only(10)
    # nothing between 0.2 and the +1/4 level
    s = filter_diagonalize(H, SpectralWindow(lo=0.2, hi=0.2499), seed=0)
    assert s.converged and len(s) == 0
    # [0.2, 0.3] reaches past the top of the spectrum, so it is not interior
    with pytest.raises(ValidationError):
        filter_diagonalize(H, SpectralWindow(lo=0.2, hi=0.3), seed=0)


def test_window_validation():
    with pytest.raises(ValidationError):
        SpectralWindow(lo=0.3, hi=0.2)
    with pytest.raises(ValidationError):
        SpectralWindow(center_fraction=1.5)
    with pytest.raises(ValidationError):
        filter_diagonalize(impurity_only(10), SpectralWindow(lo=0.0, hi=5.0))
    with pytest.raises(ValidationError):
        FilterConfig(damping="boxcar")


def test_filter_deterministic():
    g, c = random_instance(14, 0.5, 3, 3)
    H = assemble_hamiltonian(g, c)
    a = filter_diagonalize(H, seed=7)
    b = filter_diagonalize(H, seed=7)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.residuals, b.residuals)


def test_accepted_values_inside_window():
    g, c = random_instance(14, 0.8, 3, 4)
    s = filter_diagonalize(assemble_hamiltonian(g, c), SpectralWindow(0.1), seed=2)
    lo, hi = s.window
    assert np.all((s.eigenvalues >= lo) & (s.eigenvalues <= hi))


def test_orthonormal_basis(rng):
    Y = rng.standard_normal((200, 30)) + 1j * rng.standard_normal((200, 30))
    Y[:, 5] = Y[:, 3] + 1e-15
    Q = _orthonormal_basis(Y)
    assert Q.shape[1] == 29
    assert np.abs(Q.conj().T @ Q - np.eye(29)).max() < 1e-10


@pytest.mark.parametrize("i", range(10))
def test_filter_oracle_equivalence(i):
    rng = np.random.default_rng(100 + i)
    n = int(rng.choice([12, 14, 16]))
    g, c = random_instance(n, float(rng.random()), 100 + i, 200 + i)
    H = assemble_hamiltonian(g, c)
    s = filter_diagonalize(H, SpectralWindow(0.2), FilterConfig(polynomial_degree=128), seed=i)
    lo, hi = s.window
    w = dense_eigh(H).eigenvalues
    ref = w[(w >= lo) & (w <= hi)]
    assert len(s) == len(ref)
    assert np.abs(s.eigenvalues - ref).max(initial=0.0) < 1e-8


def test_matrix_free_filter_matches():
    g, c = random_instance(14, 0.5, 9, 9)
    a = filter_diagonalize(assemble_hamiltonian(g, c), seed=1)
    b = filter_diagonalize(SectorOperator(g, c), SpectralWindow(lo=a.window[0], hi=a.window[1]), seed=1)
    assert len(a) == len(b) and np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-8)


def test_spectrum_sorts():
    s = Spectrum([3.0, 1.0, 2.0], residuals=[0.3, 0.1, 0.2])
    assert list(s.eigenvalues) == [1, 2, 3] and list(s.residuals) == [0.1, 0.2, 0.3]
