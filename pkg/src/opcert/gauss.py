"""Closed-form eigensystem and moments of the pure Gaussian kernel.

The spectrum is geometric, lambda_n = eps0 * eps^n with

    eps0 = 2 sqrt(C) / (sqrt(A) + sqrt(C)),
    eps  = (sqrt(A) - sqrt(C)) / (sqrt(A) + sqrt(C)),

and the eigenfunctions are shifted, phase-twisted Hermite functions in the
scaled variable u = r (x + s), r = 2 (AC)^{1/4}, s = E/(4C).  These closed
forms serve as the validation oracle for both numerical moment routes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hermite import MAX_ORDER, hermite_function, hermite_functions
from .kernels import GaussianParams


@dataclass(frozen=True)
class GaussSpectrum:
    eps0: float
    eps: float
    r: float
    s: float

    def eigenvalue(self, n: int) -> float:
        """lambda_n = eps0 * eps^n, with 0^0 = 1 so A=C gives a pure state."""
        if n < 0:
            raise ValueError("n must be >= 0")
        if self.eps == 0.0:
            return self.eps0 if n == 0 else 0.0
        return self.eps0 * self.eps ** n

    def eigenvalues(self, count: int) -> np.ndarray:
        lam = np.empty(count)
        lam[0] = self.eps0
        for n in range(1, count):
            lam[n] = lam[n - 1] * self.eps
        return lam

    @property
    def trace_norm(self) -> float:
        """sum |lambda_n| = eps0 / (1 - |eps|)."""
        return self.eps0 / (1.0 - abs(self.eps))


def derive_spectrum(g: GaussianParams) -> GaussSpectrum:
    sa, sc = math.sqrt(g.A), math.sqrt(g.C)
    return GaussSpectrum(
        eps0=2 * sc / (sa + sc),
        eps=(sa - sc) / (sa + sc),
        r=2 * (g.A * g.C) ** 0.25,
        s=g.E / (4 * g.C),
    )


def gaussian_moment(spec: GaussSpectrum, k: int) -> float:
    """M_k = eps0^k / (1 - eps^k), exact for the pure Gaussian."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return spec.eps0 ** k / (1.0 - spec.eps ** k)


def eigenfunction(spec: GaussSpectrum, g: GaussianParams, n: int, x) -> np.ndarray:
    """Orthonormal eigenfunction phi_n(x) (complex).

    phi_n(x) = sqrt(r) h_n(r(x+s)) exp(-i(Bx^2 + Dx)) with h_n the
    orthonormal Hermite function; the phase factor is a gauge rotation that
    leaves the eigenvalues untouched.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > MAX_ORDER:
        raise ValueError(f"n={n} beyond stability horizon {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    u = spec.r * (x + spec.s)
    h = hermite_function(n, u)
    return math.sqrt(spec.r) * h * np.exp(-1j * (g.B * x * x + g.D * x))


def eigenfunctions(spec: GaussSpectrum, g: GaussianParams, nmax: int, x) -> np.ndarray:
    """phi_0..phi_nmax stacked along axis 0 (shared recursion, one pass)."""
    x = np.asarray(x, dtype=float)
    u = spec.r * (x + spec.s)
    h = hermite_functions(nmax, u)
    return math.sqrt(spec.r) * h * np.exp(-1j * (g.B * x * x + g.D * x))


def partial_sum_error(spec: GaussSpectrum, n_terms: int) -> float:
    """Exact tail of sum lambda_n after n_terms terms: eps0 |eps|^N / (1-|eps|)."""
    return spec.eps0 * abs(spec.eps) ** n_terms / (1.0 - abs(spec.eps))
