import numpy as np
import pytest

from opcert.band import band_matrix_for_spec, moments_band
from opcert.gauss import derive_spectrum, gaussian_moment
from opcert.kernels import GaussianParams, KernelError, KernelSpec, PolyCoeffs, trace
from opcert.nystrom import (discretize, make_grid, moments_nystrom, oracle_eigenvalues)


@pytest.mark.parametrize("m", [32, 64, 128])
def test_grid_reproduces_gaussian_integral(m):
    grid = make_grid(m)
    got = np.sum(grid.weights * np.exp(-grid.nodes ** 2))
    assert abs(got - np.sqrt(np.pi)) < 1e-12


def test_grid_scaling():
    grid = make_grid(64, scale=2.0, center=1.0)
    got = np.sum(grid.weights * np.exp(-((grid.nodes - 1.0) / 2.0) ** 2))
    assert abs(got - 2.0 * np.sqrt(np.pi)) < 1e-12
    with pytest.raises(ValueError):
        make_grid(4)


def test_pure_gaussian_eigenvalues_match_closed_form(pure_gaussian):
    op = discretize(pure_gaussian(4, 1), 64)
    mu = oracle_eigenvalues(op)
    lam = derive_spectrum(GaussianParams(A=4, C=1)).eigenvalues(10)
    assert np.abs(mu[:10] - lam).max() < 1e-8


def test_trace_one_normalized(fig5_family):
    op = discretize(fig5_family(1.0), 64)
    assert np.trace(op.matrix).real == pytest.approx(1.0, abs=1e-8)


def test_fig2_family_positive(fig2_family):
    # (4xy+1) kernel is a convex positive construction: no negative eigenvalues
    for sqrt_c in (0.25, 0.5, 1.0):
        op = discretize(fig2_family(sqrt_c), 64)
        assert oracle_eigenvalues(op).min() >= -1e-9


def test_moments_match_gaussian_closed_form(pure_gaussian):
    op = discretize(pure_gaussian(4, 1), 96)
    M = moments_nystrom(op, 12)
    sp = derive_spectrum(GaussianParams(A=4, C=1))
    for k in range(1, 13):
        assert M.values[k - 1] == pytest.approx(gaussian_moment(sp, k), abs=1e-8)


def test_moments_match_band_on_fig5(fig5_family):
    spec = fig5_family(0.4)
    Mn = moments_nystrom(discretize(spec, 64), 12)
    Mb = moments_band(band_matrix_for_spec(spec), 12)
    assert np.abs(Mn.values - Mb.values).max() < 1e-8


def test_m1_equals_trace(fig5_family):
    spec = fig5_family(2.0)
    M = moments_nystrom(discretize(spec, 64), 1)
    assert M.values[0] == pytest.approx(trace(spec), abs=1e-9)


def test_oracle_min_eigenvalue_gaussian_a1_c4(pure_gaussian):
    op = discretize(pure_gaussian(1, 4), 64)
    mu = oracle_eigenvalues(op)
    assert mu.min() == pytest.approx(-4.0 / 9.0, abs=1e-8)  # = lambda_1, eps = -1/3


def test_fig3_negative_gamma0_has_negative_eigenvalue(fig3_family):
    op = discretize(fig3_family(-0.1), 64)
    assert oracle_eigenvalues(op).min() < -1e-6


def test_convex_combination_kernel_positive(pure_gaussian):
    # 0.5*(x sigma y) + 0.5*sigma with sigma the positive A=4,C=1 Gaussian
    from opcert.kernels import eval_kernel
    base = pure_gaussian(4, 1)
    spec = KernelSpec.generic(
        lambda x, y: (0.5 * x * y + 0.5) * eval_kernel(base, x, y), envelope=0.6)
    op = discretize(spec, 80)
    assert oracle_eigenvalues(op).min() >= -1e-9


def test_grid_refinement_stability():
    # |eps| ~ 0.73 family: doubling m moves the moments by < 1e-8
    spec = KernelSpec.gauss_poly(GaussianParams(A=4, C=0.1),
                                 PolyCoeffs(alpha2=-1.0, gamma2=1.0, gamma0=1.0))
    m1 = moments_nystrom(discretize(spec, 96), 12, refine=False)
    m2 = moments_nystrom(discretize(spec, 192), 12, refine=False)
    assert np.abs(m1.values - m2.values).max() < 1e-8


def test_eigensolve_self_consistency(fig5_family):
    op = discretize(fig5_family(-0.8), 64)
    mu = oracle_eigenvalues(op)
    assert mu[0] >= mu[-1]  # descending
    assert np.sum(mu) == pytest.approx(np.trace(op.matrix).real, abs=1e-12)
    assert np.sum(mu ** 2) == pytest.approx(np.linalg.norm(op.matrix, "fro") ** 2,
                                            rel=1e-13)


def test_non_hermitian_kernel_aborts():
    bad = KernelSpec.generic(lambda x, y: np.exp(-x * x - y * y + 0.3 * x + 0j),
                             envelope=1.0)
    with pytest.raises(KernelError):
        discretize(bad, 32)


def test_overflowing_generic_nodes_clipped():
    # finite near the origin, overflows at the far nodes: clipped to 0, counted
    spec = KernelSpec.generic(
        lambda x, y: np.where(x * x + y * y > 500.0, np.inf,
                              np.exp(-(x - y) ** 2 - (x + y) ** 2 / 4 + 0j)),
        envelope=1.0)
    op = discretize(spec, 96)
    assert op.clipped > 0
    assert np.all(np.isfinite(op.matrix))


def test_moment_errors_cover_refinement():
    spec = KernelSpec.gauss_poly(GaussianParams(A=1.5, C=1.0),
                                 PolyCoeffs(alpha2=-1.0, gamma2=0.5, gamma0=1.0))
    M = moments_nystrom(discretize(spec, 48), 8)
    M_fine = moments_nystrom(discretize(spec, 192), 8, refine=False)
    assert np.all(np.abs(M.values - M_fine.values) <= np.maximum(M.errors, 1e-12))
