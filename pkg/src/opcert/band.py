"""Analytic moment route for the quadratic polynomial-times-Gaussian family.

In the Gaussian eigenbasis the operator is a pentadiagonal Hermitian matrix;
its entries follow from the Hermite three-term recursion.  With the physics
inner-product convention and the eigenfunctions of :mod:`opcert.gauss`, the
matrix reads (row m, column n, oracle-verified against 2D quadrature):

    entry(n, n)   = eps^n * (eps0 a0 + n b0)          [n b0 eps^n kept as
                                                       n eps^{n-1} (eps b0),
                                                       finite at eps = 0]
    entry(m, m+1) = sqrt(m+1) eps^m (a1 + i b1)
    entry(m, m+2) = sqrt((m+1)(m+2)) eps^m (a2 + i b2)

with the lower bands the complex conjugates.  Moments M_k = Tr(B^k) are
accumulated by banded-times-dense products; no eigenvalues are extracted
here (that oracle duty belongs to the Nystrom module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gauss import GaussSpectrum, derive_spectrum
from .kernels import GaussianParams, PolyCoeffs, normalization_N
from .newton import MomentVector

_EPS = np.finfo(float).eps

DEFAULT_TRUNC_TOL = 1e-14


@dataclass(frozen=True)
class BandCoeffs:
    """The six real constants of the pentadiagonal representation.

    All depend linearly on the polynomial coefficients.  ``eps_b0`` stores
    the product eps * b0, which stays finite in the degenerate A = C case
    where b0 alone would be 0/0; the matrix only ever needs n eps^n b0 =
    n eps^{n-1} (eps b0).
    """

    a0: float
    eps_b0: float
    a1: float
    b1: float
    a2: float
    b2: float


def band_coeffs(g: GaussianParams, p: PolyCoeffs) -> BandCoeffs:
    sp = derive_spectrum(g)
    e0, e, r, s = sp.eps0, sp.eps, sp.r, sp.s
    rr = r * r
    a0 = ((1 - e) * p.alpha2 + (1 + 4 * rr * s * s + e) * p.gamma2
          - 2 * rr * s * p.alpha1 + rr * p.gamma0) / rr
    eps_b0 = e0 / rr * (-(1 - e) ** 2 * p.alpha2 + (1 + e) ** 2 * p.gamma2)
    a1 = -e0 * (1 + e) / (math.sqrt(2) * r) * (4 * s * p.gamma2 - p.alpha1)
    b1 = e0 * (1 - e) / (math.sqrt(2) * r) * (2 * s * p.beta2 - p.beta1)
    a2 = e0 / (2 * rr) * ((1 - e) ** 2 * p.alpha2 + (1 + e) ** 2 * p.gamma2)
    b2 = -e0 * (1 - e * e) / (2 * rr) * p.beta2
    return BandCoeffs(a0=a0, eps_b0=eps_b0, a1=a1, b1=b1, a2=a2, b2=b2)


def default_dimension(eps: float, tol: float = DEFAULT_TRUNC_TOL) -> int:
    """Truncation rule: entries decay like eps^n times polynomial factors."""
    q = abs(eps)
    if q == 0.0:
        return 8
    return max(64, math.ceil(math.log(tol) / math.log(q)) + 16)


@dataclass(frozen=True)
class BandMatrix:
    """Truncated pentadiagonal matrix, Hermitian by construction."""

    n: int
    diag: np.ndarray    # entry(k, k),   length n
    upper1: np.ndarray  # entry(k, k+1), length n-1
    upper2: np.ndarray  # entry(k, k+2), length n-2
    spectrum: GaussSpectrum
    coeffs: BandCoeffs
    scale: float  # 1/N for normalized kernels, else 1

    def entry(self, m: int, n: int) -> complex:
        if not (0 <= m < self.n and 0 <= n < self.n):
            raise IndexError("index outside truncated matrix")
        if n == m:
            return complex(self.diag[m])
        if n == m + 1:
            return complex(self.upper1[m])
        if n == m - 1:
            return complex(np.conj(self.upper1[n]))
        if n == m + 2:
            return complex(self.upper2[m])
        if n == m - 2:
            return complex(np.conj(self.upper2[n]))
        return 0.0 + 0.0j

    def to_dense(self) -> np.ndarray:
        B = np.zeros((self.n, self.n), dtype=complex)
        idx = np.arange(self.n)
        B[idx, idx] = self.diag
        B[idx[:-1], idx[:-1] + 1] = self.upper1
        B[idx[:-1] + 1, idx[:-1]] = np.conj(self.upper1)
        B[idx[:-2], idx[:-2] + 2] = self.upper2
        B[idx[:-2] + 2, idx[:-2]] = np.conj(self.upper2)
        return B


def build_band_matrix(g: GaussianParams, p: PolyCoeffs, n_dim: int,
                      normalized: bool = False) -> BandMatrix:
    """Truncated matrix of the operator in the Gaussian eigenbasis.

    ``normalized`` divides by the trace normalization N (raises
    NormalizationSingular for zero-trace members).
    """
    if n_dim < 4:
        raise ValueError("need n_dim >= 4")
    sp = derive_spectrum(g)
    co = band_coeffs(g, p)
    scale = 1.0 / normalization_N(g, p) if normalized else 1.0

    eps = sp.eps
    pows = np.empty(n_dim)
    pows[0] = 1.0
    for k in range(1, n_dim):
        pows[k] = pows[k - 1] * eps
    ns = np.arange(n_dim)

    diag = scale * (sp.eps0 * co.a0 * pows).astype(complex)
    # n * eps^n * b0 written as n * eps^{n-1} * (eps b0); n=0 term vanishes
    diag[1:] += scale * ns[1:] * pows[:-1] * co.eps_b0

    w1 = scale * (co.a1 + 1j * co.b1)
    w2 = scale * (co.a2 + 1j * co.b2)
    upper1 = np.sqrt(ns[:-1] + 1.0) * pows[:-1] * w1
    upper2 = np.sqrt((ns[:-2] + 1.0) * (ns[:-2] + 2.0)) * pows[:-2] * w2
    return BandMatrix(n=n_dim, diag=diag, upper1=upper1, upper2=upper2,
                      spectrum=sp, coeffs=co, scale=scale)


def _apply(mat: BandMatrix, P: np.ndarray) -> np.ndarray:
    """B @ P using the five diagonals, O(n^2) per product."""
    out = mat.diag[:, None] * P
    out[:-1] += mat.upper1[:, None] * P[1:]
    out[1:] += np.conj(mat.upper1)[:, None] * P[:-1]
    out[:-2] += mat.upper2[:, None] * P[2:]
    out[2:] += np.conj(mat.upper2)[:, None] * P[:-2]
    return out


def _row_sum_tail(mat: BandMatrix, start: int) -> float:
    """Closed-form bound on sum_{n >= start} of the infinite matrix's row sums."""
    q = abs(mat.spectrum.eps)
    if q == 0.0:
        return 0.0
    co, sc = mat.coeffs, abs(mat.scale)
    N = max(start, 0)
    qN = q ** N
    F0 = qN / (1 - q)                                  # sum_{n>=N} q^n
    F1 = qN * (N - (N - 1) * q) / (1 - q) ** 2          # sum_{n>=N} n q^n
    w1 = math.hypot(co.a1, co.b1)
    w2 = math.hypot(co.a2, co.b2)
    total = (mat.spectrum.eps0 * abs(co.a0) * F0 + abs(co.eps_b0) * F1 / q
             + w1 * ((F1 + F0) + F1 / q)
             + w2 * ((F1 + 2 * F0) + F1 / (q * q)))
    return sc * total


def _gershgorin_norm(mat: BandMatrix) -> float:
    rs = np.abs(mat.diag).astype(float)
    rs[:-1] += np.abs(mat.upper1)
    rs[1:] += np.abs(mat.upper1)
    rs[:-2] += np.abs(mat.upper2)
    rs[2:] += np.abs(mat.upper2)
    return float(rs.max())


def moments_band(mat: BandMatrix, K: int) -> MomentVector:
    """M_1..M_K = Tr(B^k) with per-entry truncation-error bounds.

    The bound is k ||B||^{k-1} times the tail of the infinite matrix's row
    sums beyond the truncation (plus a rounding floor); degraded error bars
    are reported rather than raising when a requested tolerance is unmet.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    norm = max(_gershgorin_norm(mat), _row_sum_tail(mat, mat.n - 2))
    tail = _row_sum_tail(mat, mat.n - 2)

    values = np.empty(K)
    errors = np.empty(K)
    P = np.eye(mat.n, dtype=complex)
    for k in range(1, K + 1):
        P = _apply(mat, P)
        tr = np.trace(P)
        values[k - 1] = tr.real
        abs_tr = float(np.abs(np.diagonal(P)).sum())
        rounding = 8.0 * _EPS * k * abs_tr + abs(tr.imag)
        errors[k - 1] = k * norm ** (k - 1) * tail + rounding
    return MomentVector(values=values, errors=errors, source="band")


def band_matrix_for_spec(spec, n_dim: int | None = None,
                         trunc_tol: float = DEFAULT_TRUNC_TOL) -> BandMatrix:
    """Convenience: build the band matrix for a GaussPoly KernelSpec."""
    from .kernels import GaussPolyKernel

    fam = spec.family
    if not isinstance(fam, GaussPolyKernel):
        raise TypeError("band route applies to the closed-form GaussPoly family only")
    if n_dim is None:
        n_dim = default_dimension(derive_spectrum(fam.gauss).eps, trunc_tol)
    return build_band_matrix(fam.gauss, fam.poly, n_dim, normalized=fam.normalize)
