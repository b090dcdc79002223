"""Verdict assembly: cheap necessary tests first, then the e_k pipeline.

Every NonPositive certificate carries a machine-checkable witness that is
re-verified through an independent route before the certificate is returned:

* negative diagonal value  -> recomputed through the eigenbasis expansion
  (closed-form family) or direct re-evaluation (generic kernels);
* negative Pi for linear polynomials -> recomputed by 2D quadrature;
* negative e_k             -> recomputed with the other moment engine
  (Nystrom for band, doubled grid for Nystrom).

A PositiveUpTo verdict is *not* a positivity proof -- it states that
e_1..e_k stayed non-negative within tolerance up to the stated depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import band as band_mod
from . import nystrom as nys_mod
from .gauss import derive_spectrum, eigenfunctions
from .hermite import gauss_hermite
from .kernels import (GaussianParams, GaussPolyKernel, GenericKernel, KernelError,
                      KernelSpec, NormalizationSingular, PolyCoeffs, diagonal_center,
                      envelope_scale, eval_kernel, gaussian_value, hermiticity_defect,
                      normalization_N, poly_value, trace_diagnostics)
from .newton import (MomentVector, SymPolyVector, ek_bound_check, first_negative,
                     linear_entropy, newton_ek, theta_profile)

DIAG_SCAN_POINTS = 257
DIAG_REL_TOL = 1e-12


class EngineDisagreement(KernelError):
    """Band and Nystrom routes disagree beyond joint error bars."""

    def __init__(self, msg: str, details: dict):
        super().__init__(msg)
        self.details = details


@dataclass(frozen=True)
class NegativeEk:
    k: int
    value: float
    err: float


@dataclass(frozen=True)
class DiagonalPoint:
    z: float
    value: float


@dataclass(frozen=True)
class LinearWitness:
    b: float
    c: float
    pi_value: float


@dataclass(frozen=True)
class OracleEig:
    min_eigenvalue: float


Witness = Union[NegativeEk, DiagonalPoint, LinearWitness, OracleEig]

_WITNESS_TAGS = {NegativeEk: "negative_ek", DiagonalPoint: "diagonal_point",
                 LinearWitness: "linear_witness", OracleEig: "oracle_eig"}


@dataclass
class Certificate:
    verdict: str  # "non_positive" | "positive_up_to"
    depth: int
    witness: Optional[Witness] = None
    min_margin: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    @property
    def is_positive(self) -> bool:
        return self.verdict == "positive_up_to"

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = {"type": _WITNESS_TAGS[type(self.witness)]}
            w.update(vars(self.witness))
        return {"verdict": self.verdict, "depth": self.depth,
                "min_margin": self.min_margin, "witness": w,
                "provenance": self.provenance}

    def to_text(self) -> str:
        """Structured key: value serialization (stable field order, versioned)."""
        lines = ["opcert-certificate/1", f"verdict: {self.verdict}", f"depth: {self.depth}"]
        if self.min_margin is not None:
            lines.append(f"min_margin: {self.min_margin:.17g}")
        if self.witness is None:
            lines.append("witness: none")
        else:
            lines.append(f"witness: {_WITNESS_TAGS[type(self.witness)]}")
            for k, v in vars(self.witness).items():
                lines.append(f"witness.{k}: {v:.17g}" if isinstance(v, float) else f"witness.{k}: {v}")
        for k in sorted(self.provenance):
            lines.append(f"provenance.{k}: {self.provenance[k]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RSReport:
    """First and second x/p moments and the Robertson-Schrodinger indicator."""

    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float
    sigma_rs: float
    z: float


def _effective_spec(spec: KernelSpec) -> tuple[KernelSpec, bool]:
    """Resolve normalization; singular members proceed un-normalized (flagged)."""
    fam = spec.family
    if isinstance(fam, GaussPolyKernel) and fam.normalize:
        try:
            normalization_N(fam.gauss, fam.poly)
        except NormalizationSingular:
            return KernelSpec(GaussPolyKernel(fam.gauss, fam.poly, normalize=False),
                              spec.hbar), True
    return spec, False


def diagonal_scan_points(spec: KernelSpec, n: int = DIAG_SCAN_POINTS) -> np.ndarray:
    L = 6.0 * envelope_scale(spec)
    c = diagonal_center(spec)
    return np.linspace(c - L, c + L, n)


def diagonal_check(spec: KernelSpec, zs=None) -> Optional[DiagonalPoint]:
    """First scan point with Re rho(z,z) < -tol, or None.

    A non-negligible imaginary part on the diagonal is a Hermiticity
    violation and raises KernelError.
    """
    if zs is None:
        zs = diagonal_scan_points(spec)
    zs = np.asarray(zs, dtype=float)
    vals = eval_kernel(spec, zs, zs)
    scale = float(np.max(np.abs(vals))) or 1.0
    tol = DIAG_REL_TOL * scale
    if float(np.max(np.abs(vals.imag))) > max(tol, 1e-300):
        raise KernelError("kernel diagonal has a non-real value; operator is not self-adjoint")
    idx = np.nonzero(vals.real < -tol)[0]
    if idx.size == 0:
        return None
    i = int(idx[0])
    return DiagonalPoint(z=float(zs[i]), value=float(vals.real[i]))


def _verify_diagonal(spec: KernelSpec, w: DiagonalPoint) -> bool:
    """Independent recomputation of rho(z,z) for the witness point."""
    fam = spec.family
    direct = eval_kernel(spec, w.z, w.z).real
    if isinstance(fam, GaussPolyKernel):
        # eigenbasis route: rho(z,z) = phi(z)^T B conj(phi(z))
        mat = band_mod.band_matrix_for_spec(spec)
        sp = mat.spectrum
        ph = eigenfunctions(sp, fam.gauss, mat.n - 1, np.array([w.z]))[:, 0]
        recomputed = float(np.real(ph @ mat.to_dense() @ np.conj(ph)))
    else:
        recomputed = direct
    scale = max(abs(w.value), abs(recomputed), 1e-30)
    return recomputed < 0 and abs(recomputed - w.value) <= 1e-6 * scale + 1e-12


def _pi_log_parts(g: GaussianParams, alpha1: float, beta1: float, gamma0: float,
                  b: float, c: float) -> tuple[float, float]:
    """(sign, log magnitude) of the closed-form Pi(b,c)."""
    A, C, E = g.A, g.C, g.E
    factor = (2 * A + 1) * alpha1 * b + (2 * C + 1) * beta1 * c + (2 * A + 1) * (2 * C + 1) * gamma0
    if factor == 0.0:
        return 0.0, -math.inf
    log_mag = (math.log(2 * math.sqrt(math.pi * C)) - E * E / (4 * C)
               - 1.5 * math.log((2 * A + 1) * (2 * C + 1))
               + (2 * A * b * b - 2 * C * c * c + b * b - c * c)
               / (2 * (4 * A * C + 2 * A + 2 * C + 1))
               + math.log(abs(factor)))
    return (1.0 if factor > 0 else -1.0), log_mag


def pi_value(g: GaussianParams, alpha1: float, beta1: float, gamma0: float,
             b: float, c: float) -> float:
    """Closed-form Pi(b,c) = <Psi, rho Psi> for the linear family (un-normalized).

    Computed in log space; magnitudes beyond float range come back as +-inf
    with the correct sign.
    """
    sign, log_mag = _pi_log_parts(g, alpha1, beta1, gamma0, b, c)
    if sign == 0.0:
        return 0.0
    try:
        return sign * math.exp(log_mag)
    except OverflowError:
        return sign * math.inf


def linear_witness(g: GaussianParams, lin: PolyCoeffs) -> LinearWitness:
    """Analytic non-positivity witness for linear polynomial factors.

    Chooses (b, c) driving the linear factor of Pi to
    -(2A+1)(2C+1)|gamma0| - 1, so Pi < 0 without any quadrature.
    """
    if lin.degree > 1:
        raise ValueError("linear witness applies to polynomials of degree <= 1")
    if lin.alpha1 == 0.0 and lin.beta1 == 0.0:
        raise ValueError("need (alpha1, beta1) != (0, 0)")
    A, C = g.A, g.C
    target = -(2 * A + 1) * (2 * C + 1) * abs(lin.gamma0) - 1.0
    base = (2 * A + 1) * (2 * C + 1) * lin.gamma0
    if lin.alpha1 != 0.0:
        b = (target - base) / ((2 * A + 1) * lin.alpha1)
        c = 0.0
    else:
        b = 0.0
        c = (target - base) / ((2 * C + 1) * lin.beta1)
    return LinearWitness(b=b, c=c, pi_value=pi_value(g, lin.alpha1, lin.beta1, lin.gamma0, b, c))


def pi_quadrature(g: GaussianParams, alpha1: float, beta1: float, gamma0: float,
                  b: float, c: float, m: int = 400) -> float:
    """<Psi, rho Psi> by 2D Gauss-Hermite quadrature.

    Integrates against the unit-normalized Psi-hat = exp(-(x-c0)^2
    + i(c-D)x - iBx^2), c0 = (b+E)/2, which rescales Pi by e^{-2 c0^2}, then
    undoes the rescale in log space (magnitudes beyond float range come back
    as +-inf with the correct sign).
    """
    c0 = (b + g.E) / 2.0
    t, w = gauss_hermite(m)
    x = c0 + t
    psi = np.exp(-((x - c0) ** 2) + 1j * (c - g.D) * x - 1j * g.B * x * x)
    X, Y = np.meshgrid(x, x, indexing="ij")
    p = PolyCoeffs(alpha1=alpha1, beta1=beta1, gamma0=gamma0)
    K = poly_value(p, X, Y) * gaussian_value(g, X, Y)
    val = np.einsum("i,ij,j,i,j->", np.conj(psi), K, psi, w, w)
    scaled = float(val.real)
    if scaled == 0.0:
        return 0.0
    log_mag = math.log(abs(scaled)) + 2.0 * c0 * c0
    mag = math.inf if log_mag > 709.0 else math.exp(log_mag)
    return math.copysign(mag, scaled)


def pi_quadrature_mp(g: GaussianParams, alpha1: float, beta1: float, gamma0: float,
                     b: float, c: float, dps: int | None = None) -> float:
    """Extended-precision quadrature of Pi-hat = Pi e^{-2 c0^2}.

    The oscillatory phase e^{icx} suppresses Pi exponentially below the
    integrand scale, past what float64 summation can resolve.  The same
    Gauss-Hermite rule is therefore accumulated in mpmath arithmetic (the
    rule's discretization error is spectrally small; only the cancellation
    needed the extra digits).  Sign-faithful; compare against
    Pi * e^{-2 c0^2}.
    """
    import mpmath

    c0f = (b + g.E) / 2.0
    kappa = abs(c - g.D) + 2 * abs(g.B) * (abs(c0f) + 6.0)
    # node scale: psi-hat contributes decay rate 1, the kernel's x-marginal
    # adds 4AC/(A+C); shrinking sigma slows the effective oscillation
    rate = 1.0 + 4 * g.A * g.C / (g.A + g.C)
    sigma = min(1.0, max(0.6, 1.08 / math.sqrt(rate)))
    m = int(min(640, max(160, math.ceil(0.62 * (kappa * sigma) ** 2) + 80)))
    # digits: suppression below the O(1) integrand scale, plus headroom
    _, log_mag = _pi_log_parts(g, alpha1, beta1, gamma0, b, c)
    suppressed = -(log_mag - 2.0 * c0f * c0f) / math.log(10.0)
    if dps is None:
        dps = int(max(25, math.ceil(max(suppressed, 0.0)) + 12))

    x64, w64 = gauss_hermite(m)
    with mpmath.workdps(dps):
        A, B, C, D, E = (mpmath.mpf(v) for v in (g.A, g.B, g.C, g.D, g.E))
        a1, b1, g0 = (mpmath.mpf(v) for v in (alpha1, beta1, gamma0))
        c0 = mpmath.mpf(c0f)
        sg = mpmath.mpf(sigma)
        xs = [c0 + sg * mpmath.mpf(float(t)) for t in x64]
        ws = [sg * mpmath.mpf(float(v)) for v in w64]
        cc = mpmath.mpf(c)
        pref = 2 * mpmath.sqrt(C / mpmath.pi)
        psi = [mpmath.exp(-((x - c0) ** 2) + 1j * (cc - D) * x - 1j * B * x * x)
               for x in xs]
        total = mpmath.mpf(0)
        for i, x in enumerate(xs):
            row = mpmath.mpf(0)
            for j, y in enumerate(xs):
                q = (A * (x - y) ** 2 + 1j * B * (x * x - y * y) + C * (x + y) ** 2
                     + 1j * D * (x - y) + E * (x + y) + E * E / (4 * C))
                p = a1 * (x + y) + 1j * b1 * (x - y) + g0
                row += p * mpmath.exp(-q) * psi[j] * ws[j]
            total += mpmath.conj(psi[i]) * ws[i] * row * pref
        return float(mpmath.re(total))


def _diag_quadrature_grid(spec: KernelSpec, m: int):
    fam = spec.family
    if isinstance(fam, GaussPolyKernel):
        sigma = 1.0 / (2 * math.sqrt(fam.gauss.C))
    else:
        sigma = fam.envelope
    t, w = gauss_hermite(m)
    return diagonal_center(spec) + sigma * t, sigma * w


def _gausspoly_diag_derivatives(spec: KernelSpec, x: np.ndarray):
    """(rho, d_x rho, d_x d_y rho) on the diagonal, analytic."""
    fam = spec.family
    g, p = fam.gauss, fam.poly
    rho = eval_kernel(spec, x, x)
    scale = 1.0 / normalization_N(g, p) if fam.normalize else 1.0
    G = gaussian_value(g, x, x) * scale
    pv = poly_value(p, x, x)
    qx = 2j * g.B * x + 4 * g.C * x + 1j * g.D + g.E
    qy = -2j * g.B * x + 4 * g.C * x - 1j * g.D + g.E
    qxy = 2 * (g.C - g.A)
    px = 4 * p.gamma2 * x + p.alpha1 + 1j * (2 * p.beta2 * x + p.beta1)
    py = np.conj(px)
    pxy = 2 * (p.gamma2 - p.alpha2)
    drho = (px - pv * qx) * G
    dxy = (pxy - px * qy - py * qx - pv * qxy + pv * qx * qy) * G
    return rho, drho, dxy


def _generic_diag_derivatives(spec: KernelSpec, x: np.ndarray):
    h = 1e-5 * envelope_scale(spec)
    rho = eval_kernel(spec, x, x)
    drho = (eval_kernel(spec, x + h, x) - eval_kernel(spec, x - h, x)) / (2 * h)
    dxy = (eval_kernel(spec, x + h, x + h) - eval_kernel(spec, x + h, x - h)
           - eval_kernel(spec, x - h, x + h) + eval_kernel(spec, x - h, x - h)) / (4 * h * h)
    return rho, drho, dxy


def rs_uncertainty(spec: KernelSpec, m: int = 96) -> Optional[RSReport]:
    """Robertson-Schrodinger report; None when the kernel is not unit-trace.

    Position moments integrate the diagonal; momentum moments differentiate
    the kernel at the diagonal (analytically for the closed-form family,
    central differences otherwise).
    """
    hbar = spec.hbar
    x, w = _diag_quadrature_grid(spec, m)
    if spec.is_gauss_poly:
        try:
            rho, drho, dxy = _gausspoly_diag_derivatives(spec, x)
        except NormalizationSingular:
            return None
    else:
        rho, drho, dxy = _generic_diag_derivatives(spec, x)
    tr = float(np.sum(w * rho.real))
    if abs(tr - 1.0) > 1e-6:
        return None
    mean_x = float(np.sum(w * x * rho.real))
    mean_x2 = float(np.sum(w * x * x * rho.real))
    mean_p = float(np.sum(w * (-1j * hbar * drho)).real)
    mean_p2 = float(hbar * hbar * np.sum(w * dxy).real)
    cross = float(np.sum(w * x * (-1j * hbar * drho)).real)
    var_x = mean_x2 - mean_x * mean_x
    var_p = mean_p2 - mean_p * mean_p
    cov = cross - mean_x * mean_p
    sigma_rs = var_x * var_p - cov * cov
    return RSReport(mean_x=mean_x, mean_p=mean_p, var_x=var_x, var_p=var_p,
                    cov_xp=cov, sigma_rs=sigma_rs, z=sigma_rs / (hbar * hbar) - 0.25)


def _moments_via(spec: KernelSpec, engine: str, depth: int, grid_size: int,
                 prov: dict) -> MomentVector:
    if engine == "band":
        mat = band_mod.band_matrix_for_spec(spec)
        prov["band_dim"] = mat.n
        return band_mod.moments_band(mat, depth)
    op = nys_mod.discretize(spec, grid_size)
    prov["grid_size"] = grid_size
    prov["clipped_nodes"] = op.clipped
    return nys_mod.moments_nystrom(op, depth)


def _check_sign_conflicts(e_a: SymPolyVector, e_b: SymPolyVector, context: str):
    upto = min(e_a.K, e_b.K)
    for k in range(upto):
        a, da = e_a.values[k], e_a.errors[k]
        b, db = e_b.values[k], e_b.errors[k]
        if (a < -3 * da and b > 3 * db) or (b < -3 * db and a > 3 * da):
            raise EngineDisagreement(
                f"engines disagree on sign of e_{k+1} ({context})",
                {"k": k + 1, e_a.source: (a, da), e_b.source: (b, db)})


def _verify_negative_ek(spec: KernelSpec, w: NegativeEk, produced_by: str,
                        grid_size: int, prov: dict) -> None:
    """Recompute the witnessed e_k through an independent route."""
    if produced_by == "band":
        op = nys_mod.discretize(spec, grid_size)
        M2 = nys_mod.moments_nystrom(op, w.k)
    else:
        op = nys_mod.discretize(spec, 2 * grid_size)
        M2 = nys_mod.moments_nystrom(op, w.k)
    e2 = newton_ek(M2)
    v2, d2 = float(e2.values[w.k - 1]), float(e2.errors[w.k - 1])
    prov["reverify_value"] = v2
    prov["reverify_err"] = d2
    if v2 > 3 * d2:
        raise EngineDisagreement(
            f"witness e_{w.k} < 0 not reproduced (got {v2:.3e} +- {d2:.3e})",
            {"k": w.k, "witness": (w.value, w.err), "reverify": (v2, d2)})
    if abs(v2 - w.value) > 3 * (w.err + d2) + 1e-10 * max(1.0, abs(w.value)):
        raise EngineDisagreement(
            f"witness e_{w.k} mismatch between engines beyond joint error bars",
            {"k": w.k, "witness": (w.value, w.err), "reverify": (v2, d2)})


def certify(spec: KernelSpec, depth: int = 20, *, engine: str = "auto",
            grid_size: int = 64, tol: float = 0.0,
            cross_check: bool | None = None) -> Certificate:
    """Decide positivity up to the stated depth.

    Cheap necessary tests run first (diagonal scan; the analytic witness when
    the polynomial factor is linear), then e_1..e_depth from the best moment
    route.  ``engine`` is auto|band|nystrom|both; "both" also cross-validates
    the two moment routes and raises EngineDisagreement on sign conflicts.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if engine not in ("auto", "band", "nystrom", "both"):
        raise ValueError(f"unknown engine {engine!r}")
    spec, norm_singular = _effective_spec(spec)
    fam = spec.family
    is_gp = isinstance(fam, GaussPolyKernel)
    if engine == "band" and not is_gp:
        raise ValueError("band engine requires the closed-form GaussPoly family")

    prov: dict = {"requested_depth": depth, "normalization_singular": norm_singular}

    if isinstance(fam, GenericKernel):
        defect = hermiticity_defect(spec)
        prov["hermiticity_defect"] = defect
        if defect > 1e-10:
            raise KernelError(f"kernel fails Hermiticity sampling (defect {defect:.3e})")

    w_diag = diagonal_check(spec)
    if w_diag is not None:
        if not _verify_diagonal(spec, w_diag):
            raise EngineDisagreement("diagonal witness failed independent recomputation",
                                     {"witness": vars(w_diag)})
        prov["test"] = "diagonal_scan"
        return Certificate(verdict="non_positive", depth=0, witness=w_diag, provenance=prov)

    if is_gp and fam.poly.degree <= 1 and (fam.poly.alpha1 or fam.poly.beta1):
        eff = fam.poly if not fam.normalize else fam.poly.scaled(
            1.0 / normalization_N(fam.gauss, fam.poly))
        g = fam.gauss
        w_lin = linear_witness(g, eff)
        # re-verify by quadrature; exponentially suppressed Pi (oscillatory c)
        # sits below the float64 quadrature floor and needs the mp route
        _, log_mag = _pi_log_parts(g, eff.alpha1, eff.beta1, eff.gamma0, w_lin.b, w_lin.c)
        c0 = (w_lin.b + g.E) / 2.0
        if log_mag - 2.0 * c0 * c0 > math.log(1e-9):
            q = pi_quadrature(g, eff.alpha1, eff.beta1, eff.gamma0, w_lin.b, w_lin.c)
            prov["pi_verification"] = "quadrature"
        else:
            q = pi_quadrature_mp(g, eff.alpha1, eff.beta1, eff.gamma0, w_lin.b, w_lin.c)
            prov["pi_verification"] = "quadrature_mp"
        if q >= 0:
            raise EngineDisagreement("linear witness Pi < 0 not confirmed by quadrature",
                                     {"pi_formula": w_lin.pi_value, "pi_quadrature": q})
        prov["test"] = "linear_witness"
        return Certificate(verdict="non_positive", depth=0, witness=w_lin, provenance=prov)

    picked = engine
    if engine in ("auto", "both"):
        picked = "band" if is_gp else "nystrom"
    prov["engine"] = picked

    M = _moments_via(spec, picked, depth, grid_size, prov)
    e = newton_ek(M)
    prov["extended_precision"] = e.extended_precision

    run_cross = engine == "both" if cross_check is None else cross_check
    if run_cross and is_gp and picked == "band":
        M_alt = _moments_via(spec, "nystrom", min(depth, 12), grid_size, prov)
        e_alt = newton_ek(M_alt)
        delta = np.abs(M.values[:M_alt.K] - M_alt.values)
        joint = 3 * (M.errors[:M_alt.K] + M_alt.errors) + 1e-8
        if np.any(delta > joint):
            k_bad = int(np.argmax(delta > joint)) + 1
            raise EngineDisagreement(
                f"band and Nystrom moments differ at k={k_bad} beyond joint error bars",
                {"k": k_bad, "delta": float(delta[k_bad - 1]), "allowed": float(joint[k_bad - 1])})
        _check_sign_conflicts(e, e_alt, "cross-check")
        prov["cross_checked"] = True

    k_neg = first_negative(e)
    if k_neg is not None:
        w_ek = NegativeEk(k=k_neg, value=float(e.values[k_neg - 1]),
                          err=float(e.errors[k_neg - 1]))
        _verify_negative_ek(spec, w_ek, picked, grid_size, prov)
        prov["test"] = "newton_ek"
        return Certificate(verdict="non_positive", depth=k_neg, witness=w_ek, provenance=prov)

    profile = theta_profile(e, tol if tol > 0 else None)
    cert_depth = profile.certified_depth
    prov["test"] = "newton_ek"
    prov["theta"] = "".join("1" if b else "0" for b in profile.bits)
    return Certificate(verdict="positive_up_to", depth=cert_depth,
                       min_margin=float(np.min(e.values[:max(cert_depth, 1)])),
                       provenance=prov)
