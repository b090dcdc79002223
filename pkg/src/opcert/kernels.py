"""Kernel families for self-adjoint integral operators on L^2(R).

Two families are supported:

* ``GaussPolyKernel`` -- a Gaussian kernel

      rho_G(x,y) = 2 sqrt(C/pi) exp[-(A(x-y)^2 + iB(x^2-y^2) + C(x+y)^2
                                      + iD(x-y) + E(x+y) + E^2/(4C))]

  multiplied by the self-adjoint quadratic polynomial

      p(x,y) = alpha2 (x-y)^2 + i beta2 (x^2-y^2) + gamma2 (x+y)^2
               + alpha1 (x+y) + i beta1 (x-y) + gamma0,

  optionally divided by the normalization N that makes the trace 1.

* ``GenericKernel`` -- any pointwise-evaluable Hermitian kernel with a
  Gaussian decay-scale hint steering the quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable, Union

import numpy as np

from .hermite import gauss_hermite


class KernelError(Exception):
    """Base class for kernel-layer failures."""


class NormalizationSingular(KernelError):
    """The family member has (near-)zero trace; normalization undefined.

    Soft error: positivity testing is invariant under positive scaling, so
    callers proceed with the raw kernel and mark trace-based quantities
    (linear entropy, Z) undefined.
    """


class TraceQuadratureFailure(KernelError):
    def __init__(self, msg: str, achieved_error: float):
        super().__init__(msg)
        self.achieved_error = achieved_error


class EvaluationDomainError(KernelError):
    """Kernel evaluation produced a non-finite value (arguments outside envelope)."""


def _require_finite(obj, names):
    for name in names:
        v = getattr(obj, name)
        if not math.isfinite(v):
            raise ValueError(f"{type(obj).__name__}.{name} must be finite, got {v}")


@dataclass(frozen=True)
class GaussianParams:
    """The five real parameters of the Gaussian kernel; A > 0 and C > 0."""

    A: float
    C: float
    B: float = 0.0
    D: float = 0.0
    E: float = 0.0

    def __post_init__(self):
        _require_finite(self, ("A", "B", "C", "D", "E"))
        if self.A <= 0 or self.C <= 0:
            raise ValueError(f"require A > 0 and C > 0, got A={self.A}, C={self.C}")


@dataclass(frozen=True)
class PolyCoeffs:
    """Coefficients of the self-adjoint polynomial factor.

    The parameterization makes p(x,y) = p(y,x)* automatic for any real
    coefficient values.
    """

    alpha2: float = 0.0
    beta2: float = 0.0
    gamma2: float = 0.0
    alpha1: float = 0.0
    beta1: float = 0.0
    gamma0: float = 0.0

    def __post_init__(self):
        _require_finite(self, [f.name for f in fields(self)])

    def __add__(self, other: "PolyCoeffs") -> "PolyCoeffs":
        return PolyCoeffs(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def scaled(self, factor: float) -> "PolyCoeffs":
        return PolyCoeffs(*(factor * getattr(self, f.name) for f in fields(self)))

    @property
    def degree(self) -> int:
        if self.alpha2 or self.beta2 or self.gamma2:
            return 2
        if self.alpha1 or self.beta1:
            return 1
        return 0


@dataclass(frozen=True)
class GaussPolyKernel:
    gauss: GaussianParams
    poly: PolyCoeffs
    normalize: bool = True


@dataclass(frozen=True)
class GenericKernel:
    """Pointwise-evaluable Hermitian kernel.

    ``func(x, y)`` must accept broadcastable float arrays and return complex
    values; ``envelope`` is a scale L such that |rho| <~ c e^{-(x^2+y^2)/(2L^2)}.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    envelope: float

    def __post_init__(self):
        if not (math.isfinite(self.envelope) and self.envelope > 0):
            raise ValueError("envelope must be a positive finite decay scale")


Family = Union[GaussPolyKernel, GenericKernel]


@dataclass(frozen=True)
class KernelSpec:
    family: Family
    hbar: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            raise ValueError("hbar must be positive and finite")

    @staticmethod
    def gauss_poly(gauss: GaussianParams, poly: PolyCoeffs, normalize: bool = True,
                   hbar: float = 1.0) -> "KernelSpec":
        return KernelSpec(GaussPolyKernel(gauss, poly, normalize), hbar)

    @staticmethod
    def pure_gaussian(gauss: GaussianParams, hbar: float = 1.0) -> "KernelSpec":
        """The bare Gaussian kernel (polynomial factor identically 1)."""
        return KernelSpec(GaussPolyKernel(gauss, PolyCoeffs(gamma0=1.0), normalize=False), hbar)

    @staticmethod
    def generic(func, envelope: float, hbar: float = 1.0) -> "KernelSpec":
        return KernelSpec(GenericKernel(func, envelope), hbar)

    @property
    def is_gauss_poly(self) -> bool:
        return isinstance(self.family, GaussPolyKernel)


def normalization_N(g: GaussianParams, p: PolyCoeffs) -> float:
    """Trace of the un-normalized polynomial-times-Gaussian kernel.

    N = gamma0 + (gamma2 - alpha1 E)/(2C) + gamma2 E^2 / (4 C^2); dividing
    the kernel by N enforces unit trace.  Raises NormalizationSingular when
    |N| < 1e-14.
    """
    C, E = g.C, g.E
    N = p.gamma0 + (p.gamma2 - p.alpha1 * E) / (2 * C) + p.gamma2 * E * E / (4 * C * C)
    if abs(N) < 1e-14:
        raise NormalizationSingular(f"normalization N = {N:.3e} is singular (zero-trace member)")
    return N


def gaussian_value(g: GaussianParams, x, y):
    """rho_G(x,y) including the 2 sqrt(C/pi) prefactor."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    expo = (g.A * (x - y) ** 2 + 1j * g.B * (x * x - y * y) + g.C * (x + y) ** 2
            + 1j * g.D * (x - y) + g.E * (x + y) + g.E * g.E / (4 * g.C))
    return 2 * math.sqrt(g.C / math.pi) * np.exp(-expo)


def poly_value(p: PolyCoeffs, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (p.alpha2 * (x - y) ** 2 + 1j * p.beta2 * (x * x - y * y)
            + p.gamma2 * (x + y) ** 2 + p.alpha1 * (x + y)
            + 1j * p.beta1 * (x - y) + p.gamma0)


def eval_kernel(spec: KernelSpec, x, y):
    """rho(x,y) for scalar or broadcastable array arguments (complex).

    For a normalized GaussPoly family this includes the 1/N factor and may
    raise NormalizationSingular.  Non-finite results raise
    EvaluationDomainError.
    """
    fam = spec.family
    if isinstance(fam, GaussPolyKernel):
        val = poly_value(fam.poly, x, y) * gaussian_value(fam.gauss, x, y)
        if fam.normalize:
            val = val / normalization_N(fam.gauss, fam.poly)
    else:
        val = np.asarray(fam.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
                         dtype=complex)
    if not np.all(np.isfinite(val)):
        raise EvaluationDomainError("kernel evaluation overflowed (arguments too large for envelope)")
    if np.isscalar(x) and np.isscalar(y):
        return complex(val)
    return val


def envelope_scale(spec: KernelSpec) -> float:
    """Decay scale of the kernel diagonal (std of the diagonal Gaussian)."""
    fam = spec.family
    if isinstance(fam, GaussPolyKernel):
        return 1.0 / math.sqrt(8 * fam.gauss.C)
    return fam.envelope


def diagonal_center(spec: KernelSpec) -> float:
    """Center of the diagonal Gaussian: -E/(4C) for the closed-form family."""
    fam = spec.family
    if isinstance(fam, GaussPolyKernel):
        return -fam.gauss.E / (4 * fam.gauss.C)
    return 0.0


def hermiticity_defect(spec: KernelSpec, n_samples: int = 100, seed: int = 0) -> float:
    """max |rho(x,y) - rho(y,x)*| over random sample points inside the envelope."""
    rng = np.random.default_rng(seed)
    scale = envelope_scale(spec) * 4
    c = diagonal_center(spec)
    x = c + scale * rng.standard_normal(n_samples)
    y = c + scale * rng.standard_normal(n_samples)
    fam = spec.family
    if isinstance(fam, GaussPolyKernel) and fam.normalize:
        # defect is scale-invariant; skip the 1/N factor so singular members still check
        spec = KernelSpec(GaussPolyKernel(fam.gauss, fam.poly, normalize=False), spec.hbar)
    a = eval_kernel(spec, x, y)
    b = eval_kernel(spec, y, x)
    return float(np.max(np.abs(a - np.conj(b))))


def _diagonal_quadrature(spec: KernelSpec, m: int) -> complex:
    fam = spec.family
    if isinstance(fam, GaussPolyKernel):
        sigma = 1.0 / (2 * math.sqrt(fam.gauss.C))
    else:
        sigma = fam.envelope
    center = diagonal_center(spec)
    t, w = gauss_hermite(m)
    x = center + sigma * t
    vals = eval_kernel(spec, x, x)
    return complex(np.sum(sigma * w * vals))


def trace_diagnostics(spec: KernelSpec, m: int = 96) -> tuple[float, float, float]:
    """(trace, refinement error estimate, imaginary residue)."""
    t1 = _diagonal_quadrature(spec, m)
    t2 = _diagonal_quadrature(spec, 2 * m)
    err = abs(t2 - t1)
    return t2.real, err, abs(t2.imag)


def trace(spec: KernelSpec, m: int = 96, tol: float = 1e-8) -> float:
    """Tr(rho) = int rho(x,x) dx by envelope-guided Gauss-Hermite quadrature.

    Exact (up to rounding) for the closed-form family; Generic kernels use
    the envelope hint and a grid-refinement convergence check.
    """
    value, err, imag = trace_diagnostics(spec, m)
    if err > tol * max(1.0, abs(value)):
        raise TraceQuadratureFailure(
            f"trace quadrature did not converge (refinement delta {err:.3e})", err)
    if imag > 1e-9 * max(1.0, abs(value)):
        raise TraceQuadratureFailure(
            f"trace has non-negligible imaginary part {imag:.3e} (kernel not Hermitian?)", imag)
    return value
