"""Nystrom discretization of a kernel on Gauss-Hermite nodes.

The integral operator is collapsed to the finite Hermitian matrix

    B_ij = sqrt(w_i) rho(x_i, x_j) sqrt(w_j)

on scaled, weight-compensated Gauss-Hermite nodes; its eigenvalues
approximate the operator spectrum, giving both the moment route
M_k = sum mu_i^k and the ground-truth positivity oracle used in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hermite import gauss_hermite
from .kernels import (GaussPolyKernel, GenericKernel, KernelError, KernelSpec,
                      eval_kernel, normalization_N)
from .newton import MomentVector

_EPS = np.finfo(float).eps

SYMMETRY_ABORT = 1e-8


@dataclass(frozen=True)
class QuadratureGrid:
    """Scaled Gauss-Hermite nodes with compensated weights.

    ``weights`` already include the Hermite weight-function correction and
    the affine stretch, so sum w_i f(x_i) ~ int f for f decaying at least
    like the stretched Gaussian.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scale: float
    center: float = 0.0

    @property
    def m(self) -> int:
        return self.nodes.size


def make_grid(m: int, scale: float = 1.0, center: float = 0.0) -> QuadratureGrid:
    if m < 8:
        raise ValueError("grid size must be >= 8")
    t, w = gauss_hermite(m)
    return QuadratureGrid(nodes=center + scale * t, weights=scale * w,
                          scale=scale, center=center)


def auto_scale(spec: KernelSpec) -> tuple[float, float]:
    """(scale, center) targeting the kernel's Gaussian core."""
    fam = spec.family
    if isinstance(fam, GaussPolyKernel):
        g = fam.gauss
        return 1.0 / math.sqrt(2.0 * math.sqrt(g.A * g.C)), -g.E / (4 * g.C)
    return math.sqrt(2.0) * fam.envelope, 0.0


@dataclass(frozen=True)
class DiscretizedOperator:
    matrix: np.ndarray  # Hermitian complex
    grid: QuadratureGrid
    spec: KernelSpec
    clipped: int          # node pairs zeroed after evaluation overflow
    symmetry_defect: float

    @property
    def m(self) -> int:
        return self.grid.m


def _evaluate_clipped(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, int]:
    fam = spec.family
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        if isinstance(fam, GaussPolyKernel):
            from .kernels import gaussian_value, poly_value
            vals = poly_value(fam.poly, X, Y) * gaussian_value(fam.gauss, X, Y)
            if fam.normalize:
                vals = vals / normalization_N(fam.gauss, fam.poly)
        else:
            vals = np.asarray(fam.func(X, Y), dtype=complex)
    bad = ~np.isfinite(vals)
    clipped = int(bad.sum())
    if clipped:
        vals = np.where(bad, 0.0, vals)
    return vals, clipped


def discretize(spec: KernelSpec, m: int = 64, scale: float | None = None) -> DiscretizedOperator:
    """Build the Nystrom matrix; auto-scales to the kernel envelope by default."""
    auto_sigma, center = auto_scale(spec)
    grid = make_grid(m, scale if scale is not None else auto_sigma, center)
    X, Y = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    vals, clipped = _evaluate_clipped(spec, X, Y)
    sw = np.sqrt(grid.weights)
    B = sw[:, None] * vals * sw[None, :]
    defect = float(np.max(np.abs(B - B.conj().T)))
    if defect > SYMMETRY_ABORT * max(1.0, float(np.max(np.abs(B)))):
        raise KernelError(f"kernel is not Hermitian (symmetrization defect {defect:.3e})")
    B = 0.5 * (B + B.conj().T)
    return DiscretizedOperator(matrix=B, grid=grid, spec=spec,
                               clipped=clipped, symmetry_defect=defect)


def oracle_eigenvalues(op: DiscretizedOperator) -> np.ndarray:
    """All eigenvalues of the discretized operator, descending.

    Ground-truth positivity oracle at grid resolution: a minimum eigenvalue
    below -tol certifies non-positivity of the discretization.
    """
    try:
        mu = np.linalg.eigvalsh(op.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        raise KernelError(f"eigensolve failed on {op.m}x{op.m} Nystrom matrix: {exc}") from exc
    return mu[::-1]


def _power_sums(mu: np.ndarray, K: int) -> np.ndarray:
    out = np.empty(K)
    powers = np.ones_like(mu)
    for k in range(1, K + 1):
        powers = powers * mu
        out[k - 1] = powers.sum()
    return out


def moments_nystrom(op: DiscretizedOperator, K: int, refine: bool = True) -> MomentVector:
    """M_k from the eigenvalues of the Nystrom matrix.

    One Hermitian eigensolve, then K power sums.  With ``refine`` the grid is
    doubled and the finer values are reported with the refinement delta as
    the per-entry error estimate.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    mu = oracle_eigenvalues(op)
    coarse = _power_sums(mu, K)
    abs_sums = _power_sums(np.abs(mu), K)
    floor = 16.0 * _EPS * np.arange(1, K + 1) * np.maximum(abs_sums, 1.0)
    if not refine:
        return MomentVector(values=coarse, errors=floor, source="nystrom")
    fine_op = discretize(op.spec, 2 * op.m, op.grid.scale)
    mu2 = oracle_eigenvalues(fine_op)
    fine = _power_sums(mu2, K)
    errors = np.abs(fine - coarse) + floor
    return MomentVector(values=fine, errors=errors, source="nystrom")
