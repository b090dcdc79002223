"""Shared fixtures and independent quadrature oracles.

The oracles here deliberately avoid the production code paths they check:
matrix elements come from dense 2D Gauss-Hermite quadrature against the
closed-form eigenfunctions, and e_k references come from brute-force subset
sums over explicit spectra.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from opcert.gauss import derive_spectrum, eigenfunctions
from opcert.hermite import gauss_hermite
from opcert.kernels import (GaussianParams, KernelSpec, PolyCoeffs, gaussian_value,
                            poly_value)


def gh_points(m: int, center: float = 0.0, sigma: float = 1.0):
    t, w = gauss_hermite(m)
    return center + sigma * t, sigma * w


def matrix_elements_quadrature(g: GaussianParams, p: PolyCoeffs, nmax: int,
                               mq: int = 160) -> np.ndarray:
    """<phi_m, rho phi_n> for m,n <= nmax by 2D quadrature (physics convention)."""
    sp = derive_spectrum(g)
    sigma = math.sqrt(2.0) / sp.r
    x, w = gh_points(mq, center=-sp.s, sigma=sigma)
    K = poly_value(p, x[:, None], x[None, :]) * gaussian_value(g, x[:, None], x[None, :])
    phi = eigenfunctions(sp, g, nmax, x)  # (nmax+1, mq)
    return np.einsum("mi,ij,nj,i,j->mn", np.conj(phi), K, phi, w, w)


def brute_force_ek(spectrum, kmax: int) -> np.ndarray:
    """Elementary symmetric polynomials by direct subset sums (exact-ish fsum)."""
    out = np.empty(kmax)
    for k in range(1, kmax + 1):
        if k > len(spectrum):
            out[k - 1] = 0.0
            continue
        out[k - 1] = math.fsum(math.prod(c) for c in itertools.combinations(spectrum, k))
    return out


def power_sums(spectrum, kmax: int) -> np.ndarray:
    return np.array([math.fsum(v ** k for v in spectrum) for k in range(1, kmax + 1)])


@pytest.fixture
def fig5_family():
    """A=3/2, C=1 quadratic family: (-(x-y)^2 + gamma2 (x+y)^2 + 1) * Gaussian."""
    def make(gamma2: float, normalize: bool = True) -> KernelSpec:
        return KernelSpec.gauss_poly(
            GaussianParams(A=1.5, C=1.0),
            PolyCoeffs(alpha2=-1.0, gamma2=gamma2, gamma0=1.0),
            normalize=normalize)
    return make


@pytest.fixture
def fig3_family():
    """A=4, C=1 family proportional to (4xy + gamma0) * Gaussian (un-normalized)."""
    def make(gamma0: float) -> KernelSpec:
        return KernelSpec.gauss_poly(
            GaussianParams(A=4.0, C=1.0),
            PolyCoeffs(alpha2=-1.0, gamma2=1.0, gamma0=gamma0),
            normalize=False)
    return make


@pytest.fixture
def fig2_family():
    """A=1 family (4xy + 1) * Gaussian as a function of sqrt(C)."""
    def make(sqrt_c: float, normalize: bool = True) -> KernelSpec:
        return KernelSpec.gauss_poly(
            GaussianParams(A=1.0, C=sqrt_c ** 2),
            PolyCoeffs(alpha2=-1.0, gamma2=1.0, gamma0=1.0),
            normalize=normalize)
    return make


@pytest.fixture
def pure_gaussian():
    def make(A: float, C: float, B: float = 0.0, D: float = 0.0, E: float = 0.0,
             normalize: bool = False) -> KernelSpec:
        return KernelSpec.gauss_poly(GaussianParams(A=A, C=C, B=B, D=D, E=E),
                                     PolyCoeffs(gamma0=1.0), normalize=normalize)
    return make
