import dataclasses
import math

import numpy as np
import pytest

from opcert.band import (BandCoeffs, band_coeffs, band_matrix_for_spec,
                         build_band_matrix, default_dimension, moments_band)
from opcert.gauss import derive_spectrum, gaussian_moment
from opcert.kernels import GaussianParams, KernelSpec, PolyCoeffs

from conftest import matrix_elements_quadrature


def test_coeffs_pure_gaussian():
    co = band_coeffs(GaussianParams(A=4, C=1), PolyCoeffs(gamma0=1.0))
    assert co.a0 == pytest.approx(1.0, rel=1e-15)
    for f in ("eps_b0", "a1", "b1", "a2", "b2"):
        assert getattr(co, f) == 0.0


def test_coeffs_tridiagonal_collapse():
    co = band_coeffs(GaussianParams(A=2, C=0.5, E=1.0),
                     PolyCoeffs(alpha1=0.7, beta1=-0.4, gamma0=1.0))
    assert co.a2 == 0.0 and co.b2 == 0.0


def test_coeffs_a2_substitution():
    # A=4, C=1: eps0=2/3, eps=1/3, r^2=8 -> a2 = (2/3/16)(-4/9 + 16/9) = 1/18
    co = band_coeffs(GaussianParams(A=4, C=1), PolyCoeffs(alpha2=-1.0, gamma2=1.0))
    assert co.a2 == pytest.approx(1.0 / 18.0, rel=1e-14)


def test_coeffs_superposition():
    g = GaussianParams(A=2.3, C=0.8, E=0.6)
    rng = np.random.default_rng(5)
    for _ in range(20):
        cp, cq = rng.uniform(-2, 2, size=(2, 6))
        p, q = PolyCoeffs(*cp), PolyCoeffs(*cq)
        cp_, cq_, cs = band_coeffs(g, p), band_coeffs(g, q), band_coeffs(g, p + q)
        for f in dataclasses.fields(BandCoeffs):
            assert getattr(cs, f.name) == pytest.approx(
                getattr(cp_, f.name) + getattr(cq_, f.name), rel=1e-12, abs=1e-15)


def test_pure_gaussian_matrix_is_diagonal_of_eigenvalues():
    g = GaussianParams(A=4, C=1)
    mat = build_band_matrix(g, PolyCoeffs(gamma0=1.0), 40)
    lam = derive_spectrum(g).eigenvalues(40)
    assert np.abs(mat.diag - lam).max() < 1e-15
    assert np.abs(mat.upper1).max() == 0.0 and np.abs(mat.upper2).max() == 0.0


@pytest.mark.parametrize("g,p", [
    # Fig. 5 parameter set
    (GaussianParams(A=1.5, C=1.0), PolyCoeffs(alpha2=-1.0, gamma2=0.7, gamma0=1.0)),
    # fully generic: shift, phases, and all six polynomial coefficients
    (GaussianParams(A=4.0, C=1.0, B=0.5, D=-0.3, E=1.0),
     PolyCoeffs(alpha2=-1.0, beta2=0.7, gamma2=1.3, alpha1=0.4, beta1=-0.6, gamma0=2.0)),
])
def test_entries_match_quadrature_oracle(g, p):
    # mandatory gate: the printed-index conventions are trusted only via this
    ref = matrix_elements_quadrature(g, p, 12)
    mat = build_band_matrix(g, p, 13)
    got = np.array([[mat.entry(m, n) for n in range(13)] for m in range(13)])
    assert np.abs(got[:12, :12] - ref[:12, :12]).max() < 1e-8


def test_hermitian_and_banded_exact():
    g = GaussianParams(A=4, C=1, E=0.5)
    p = PolyCoeffs(alpha2=-0.5, beta2=0.3, gamma2=0.8, alpha1=0.2, beta1=0.9, gamma0=1.0)
    mat = build_band_matrix(g, p, 16)
    B = mat.to_dense()
    assert np.array_equal(B, B.conj().T)  # exact, by construction
    for m in range(16):
        for n in range(16):
            if abs(m - n) > 2:
                assert B[m, n] == 0.0
            assert mat.entry(m, n) == B[m, n]


def test_moments_pure_gaussian_match_closed_form():
    g = GaussianParams(A=4, C=1)
    mat = build_band_matrix(g, PolyCoeffs(gamma0=1.0), 200)
    M = moments_band(mat, 12)
    sp = derive_spectrum(g)
    for k in range(1, 13):
        assert M.values[k - 1] == pytest.approx(gaussian_moment(sp, k), abs=1e-12)


def test_fig5_m2_crossing_near_minus_065(fig5_family):
    def m2(gamma2):
        mat = band_matrix_for_spec(fig5_family(gamma2))
        return moments_band(mat, 2).values[1]
    assert m2(-0.60) < 1.0 < m2(-0.70)
    assert m2(-0.65) == pytest.approx(1.0, abs=5e-3)


def test_m1_is_one_for_normalized(fig5_family):
    for g2 in (-0.5, 0.0, 1.0, 3.0):
        mat = band_matrix_for_spec(fig5_family(g2))
        assert moments_band(mat, 1).values[0] == pytest.approx(1.0, abs=1e-12)


def test_cross_route_agreement_with_nystrom(fig5_family):
    from opcert.nystrom import discretize, moments_nystrom
    for g2 in (-0.8, 0.3, 1.0, 4.0):
        spec = fig5_family(g2)
        Mb = moments_band(band_matrix_for_spec(spec), 12)
        Mn = moments_nystrom(discretize(spec, 64), 12)
        assert np.abs(Mb.values - Mn.values).max() < 1e-8


def test_truncation_monotone_within_reported_bound():
    g = GaussianParams(A=4, C=0.25)  # |eps| = 0.6: slow decay
    p = PolyCoeffs(alpha2=-1.0, gamma2=1.0, gamma0=1.0)
    n0 = default_dimension(derive_spectrum(g).eps)
    M_small = moments_band(build_band_matrix(g, p, n0, normalized=True), 10)
    M_big = moments_band(build_band_matrix(g, p, n0 + 64, normalized=True), 10)
    delta = np.abs(M_small.values - M_big.values)
    assert np.all(delta <= M_small.errors + 1e-15)


def _closed_form_k3(mat):
    """Third oracle: M_1..M_3 from explicit geometric sums sum n^p eps^(nq)."""
    e = mat.spectrum.eps
    A0 = mat.scale * mat.spectrum.eps0 * mat.coeffs.a0
    C0 = mat.scale * mat.coeffs.eps_b0
    w1 = mat.scale * (mat.coeffs.a1 + 1j * mat.coeffs.b1)
    w2 = mat.scale * (mat.coeffs.a2 + 1j * mat.coeffs.b2)
    aw1, aw2 = abs(w1) ** 2, abs(w2) ** 2
    q2, q3 = e * e, e ** 3
    m1 = A0 / (1 - e) + C0 / (1 - e) ** 2
    m2 = (A0 * A0 / (1 - q2) + 2 * A0 * C0 * e / (1 - q2) ** 2
          + C0 * C0 * (1 + q2) / (1 - q2) ** 3
          + 2 * aw1 / (1 - q2) ** 2 + 4 * aw2 / (1 - q2) ** 3)
    d3 = (A0 ** 3 / (1 - q3) + 3 * A0 * A0 * C0 * e * e / (1 - q3) ** 2
          + 3 * A0 * C0 * C0 * e * (1 + q3) / (1 - q3) ** 3
          + C0 ** 3 * (1 + 4 * q3 + q3 * q3) / (1 - q3) ** 4)
    t_part = aw1 * (A0 * (1 + e) / (1 - q3) ** 2
                    + C0 * (2 * e * e / (1 - q3) ** 3 + (1 + q3) / (1 - q3) ** 3))
    u_part = aw2 * (A0 * (1 + e * e) * 2 / (1 - q3) ** 3
                    + C0 * (6 * e * e / (1 - q3) ** 4
                            + e * (6 / (1 - q3) ** 4 - 2 / (1 - q3) ** 3)))
    mixed = 6 * (w1 * w1 * np.conj(w2)).real * 2 * e / (1 - q3) ** 3
    m3 = d3 + 3 * t_part + 3 * u_part + mixed
    return np.array([m1, m2, m3])


def test_geometric_sum_oracle_k3():
    cases = [
        (GaussianParams(A=4, C=1), PolyCoeffs(alpha2=-1.0, gamma2=1.0, gamma0=1.0)),
        (GaussianParams(A=1.5, C=1.0, E=0.8),
         PolyCoeffs(alpha2=0.5, beta2=-0.3, gamma2=0.9, alpha1=1.1, beta1=0.2, gamma0=1.5)),
        (GaussianParams(A=1, C=2.5), PolyCoeffs(gamma2=1.0, gamma0=2.0)),
    ]
    for g, p in cases:
        mat = build_band_matrix(g, p, 400)
        got = moments_band(mat, 3).values
        want = _closed_form_k3(mat)
        assert np.abs(got - want).max() < 1e-10


def test_degenerate_eps_zero():
    g = GaussianParams(A=1, C=1)  # eps = 0
    p = PolyCoeffs(alpha2=-0.4, gamma2=0.6, gamma0=1.0)
    assert default_dimension(0.0) == 8
    mat = build_band_matrix(g, p, 8)
    assert np.all(np.isfinite(mat.to_dense()))
    from opcert.nystrom import discretize, moments_nystrom
    spec = KernelSpec.gauss_poly(g, p, normalize=False)
    Mb = moments_band(mat, 6)
    Mn = moments_nystrom(discretize(spec, 64), 6)
    assert np.abs(Mb.values - Mn.values).max() < 1e-8


def test_spec_helpers_validate():
    with pytest.raises(TypeError):
        band_matrix_for_spec(KernelSpec.generic(lambda x, y: x * y, envelope=1.0))
    with pytest.raises(ValueError):
        build_band_matrix(GaussianParams(A=1, C=1), PolyCoeffs(gamma0=1.0), 3)
    with pytest.raises(ValueError):
        moments_band(build_band_matrix(GaussianParams(A=1, C=1), PolyCoeffs(gamma0=1.0), 8), 0)
    assert default_dimension(1 / 3) == 64
    assert default_dimension(0.9) == math.ceil(math.log(1e-14) / math.log(0.9)) + 16
