"""Parameter sweeps: per-point test columns, CSV emission, H_k interval summaries.

Every grid point gets one row with the full column set (failed engines emit
NaN markers, never blanks).  The positivity sets H_k = {t : e_i(t) >= -tol_i
for all i <= k} are reported as unions of parameter intervals; boundaries
between samples of opposite indicator are refined by bisection to 1e-3
parameter resolution.  All interval families are built from one shared
sample set, which makes the nesting H_{k+1} within H_k exact in the output.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from . import band as band_mod
from . import nystrom as nys_mod
from .certify import Certificate, certify, diagonal_check, rs_uncertainty, _effective_spec
from .kernels import GaussPolyKernel, KernelError, KernelSpec
from .newton import linear_entropy, newton_ek, theta_profile

try:
    VERSION = metadata.version("opcert")
except metadata.PackageNotFoundError:  # running from a source tree
    VERSION = "0.0.dev"

GAUSS_PARAMS = ("A", "B", "C", "D", "E")
POLY_PARAMS = ("alpha2", "beta2", "gamma2", "alpha1", "beta1", "gamma0")
DERIVED_PARAMS = ("inv_A",)
REFINE_RESOLUTION = 1e-3


def apply_param(base: KernelSpec, name: str, value: float) -> KernelSpec:
    """Rebuild the spec with one swept parameter replaced."""
    fam = base.family
    if not isinstance(fam, GaussPolyKernel):
        raise ValueError("sweeps require the closed-form GaussPoly family")
    if name in GAUSS_PARAMS:
        g = dataclasses.replace(fam.gauss, **{name: value})
        return KernelSpec(GaussPolyKernel(g, fam.poly, fam.normalize), base.hbar)
    if name == "inv_A":
        g = dataclasses.replace(fam.gauss, A=1.0 / value)
        return KernelSpec(GaussPolyKernel(g, fam.poly, fam.normalize), base.hbar)
    if name in POLY_PARAMS:
        p = dataclasses.replace(fam.poly, **{name: value})
        return KernelSpec(GaussPolyKernel(fam.gauss, p, fam.normalize), base.hbar)
    raise ValueError(f"unknown sweep parameter {name!r}")


@dataclass(frozen=True)
class SweepSpec:
    base: KernelSpec
    param: str
    lo: float
    hi: float
    count: int
    depth: int = 20
    engine: str = "auto"
    grid_size: int = 64
    tol: float = 0.0
    seed: int = 0  # recorded for reproducibility bookkeeping; the sweep is deterministic

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if self.count < 2:
            raise ValueError("need count >= 2")
        if self.depth < 1:
            raise ValueError("need depth >= 1")
        # positivity-domain validation across the whole range
        if self.param in ("A", "C") and self.lo <= 0:
            raise ValueError(f"sweeping {self.param} requires the range to stay > 0")
        if self.param == "inv_A" and self.lo <= 0:
            raise ValueError("sweeping inv_A requires the range to stay > 0")
        for v in (self.lo, self.hi):
            apply_param(self.base, self.param, v)  # raises if out of domain

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass
class SweepRow:
    value: float
    moments: np.ndarray
    moment_errs: np.ndarray
    ek: np.ndarray
    ek_errs: np.ndarray
    theta: np.ndarray  # bool bits
    z: float
    lin_entropy: float
    verdict: str  # positive_up_to | non_positive | engine_failure
    witness: str
    ok: bool = True


def _nan_row(value: float, depth: int, message: str) -> SweepRow:
    nans = np.full(depth, np.nan)
    return SweepRow(value=value, moments=nans, moment_errs=nans.copy(), ek=nans.copy(),
                    ek_errs=nans.copy(), theta=np.zeros(depth, dtype=bool),
                    z=math.nan, lin_entropy=math.nan, verdict="engine_failure",
                    witness=message, ok=False)


def _moment_pipeline(spec: KernelSpec, depth: int, engine: str, grid_size: int):
    eff, _ = _effective_spec(spec)
    use_band = eff.is_gauss_poly and engine in ("auto", "band", "both")
    if use_band:
        mat = band_mod.band_matrix_for_spec(eff)
        M = band_mod.moments_band(mat, depth)
    else:
        op = nys_mod.discretize(eff, grid_size)
        M = nys_mod.moments_nystrom(op, depth)
    return M, newton_ek(M)


def evaluate_point(spec: SweepSpec, value: float) -> SweepRow:
    """Full row: moments, e_k, theta bits, Z, entropy, and the verdict."""
    try:
        point = apply_param(spec.base, spec.param, value)
        M, e = _moment_pipeline(point, spec.depth, spec.engine, spec.grid_size)
        bits = theta_profile(e, spec.tol if spec.tol > 0 else None).bits
        rs = rs_uncertainty(point)
        ent = linear_entropy(M)
        cert = certify(point, spec.depth, engine=spec.engine, grid_size=spec.grid_size,
                       tol=spec.tol)
        return SweepRow(value=value, moments=M.values, moment_errs=M.errors,
                        ek=e.values, ek_errs=e.errors, theta=bits,
                        z=rs.z if rs is not None else math.nan,
                        lin_entropy=ent if ent is not None else math.nan,
                        verdict=cert.verdict, witness=_witness_summary(cert))
    except KernelError as exc:
        return _nan_row(value, spec.depth, f"{type(exc).__name__}: {exc}")


def _witness_summary(cert: Certificate) -> str:
    if cert.witness is None:
        return f"depth={cert.depth}"
    d = cert.to_dict()["witness"]
    parts = [d.pop("type")]
    parts += [f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in d.items()]
    return ";".join(parts)


def _light_bits(spec: SweepSpec, value: float) -> tuple[np.ndarray, bool]:
    """(theta bits, positive-verdict bit) for boundary refinement points."""
    try:
        point = apply_param(spec.base, spec.param, value)
        _, e = _moment_pipeline(point, spec.depth, spec.engine, spec.grid_size)
        bits = theta_profile(e, spec.tol if spec.tol > 0 else None).bits
        eff, _ = _effective_spec(point)
        positive = diagonal_check(eff) is None and not (e.values < -3 * e.errors).any()
        return bits, positive
    except KernelError:
        return np.zeros(spec.depth, dtype=bool), False


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]
    h_intervals: dict[int, list[tuple[float, float]]]
    positive_intervals: list[tuple[float, float]]
    csv: str = ""

    def summary_text(self) -> str:
        lines = [f"sweep {self.spec.param} in [{self.spec.lo:g}, {self.spec.hi:g}] "
                 f"({self.spec.count} points, depth {self.spec.depth})"]
        lines.append("positive-verdict region: " + _fmt_intervals(self.positive_intervals))
        for k in sorted(self.h_intervals):
            lines.append(f"H_{k}: " + _fmt_intervals(self.h_intervals[k]))
        return "\n".join(lines)


def _fmt_intervals(intervals: list[tuple[float, float]]) -> str:
    if not intervals:
        return "(empty)"
    return " u ".join(f"[{a:.6g}, {b:.6g}]" for a, b in intervals)


def _intervals_from_samples(ts: np.ndarray, bits: np.ndarray,
                            lo: float, hi: float) -> list[tuple[float, float]]:
    """Maximal intervals where the sampled indicator is 1; edges at bracket midpoints."""
    out = []
    start = None
    for i, b in enumerate(bits):
        if b and start is None:
            start = lo if i == 0 else 0.5 * (ts[i - 1] + ts[i])
        if not b and start is not None:
            out.append((start, 0.5 * (ts[i - 1] + ts[i])))
            start = None
    if start is not None:
        out.append((start, hi))
    return out


def run_sweep(spec: SweepSpec, max_workers: int | None = None) -> SweepResult:
    values = spec.values()
    if max_workers is None:
        max_workers = 4
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(lambda v: evaluate_point(spec, float(v)), values))
    else:
        rows = [evaluate_point(spec, float(v)) for v in values]

    # shared sample set for all indicator families keeps H_{k+1} subset of H_k exact
    samples: dict[float, tuple[np.ndarray, bool]] = {
        float(r.value): (r.theta, r.verdict == "positive_up_to") for r in rows}
    for _ in range(200):
        ts = sorted(samples)
        new_points = []
        for a, b in zip(ts, ts[1:]):
            if b - a <= REFINE_RESOLUTION:
                continue
            bits_a, pos_a = samples[a]
            bits_b, pos_b = samples[b]
            if pos_a != pos_b or not np.array_equal(bits_a, bits_b):
                new_points.append(0.5 * (a + b))
        if not new_points:
            break
        for t in new_points:
            samples[t] = _light_bits(spec, t)

    ts = np.array(sorted(samples))
    bit_matrix = np.array([samples[t][0] for t in ts])
    pos_bits = np.array([samples[t][1] for t in ts])
    h_intervals = {k: _intervals_from_samples(ts, bit_matrix[:, k - 1], spec.lo, spec.hi)
                   for k in range(1, spec.depth + 1)}
    positive = _intervals_from_samples(ts, pos_bits, spec.lo, spec.hi)

    result = SweepResult(spec=spec, rows=rows, h_intervals=h_intervals,
                         positive_intervals=positive)
    result.csv = render_csv(result)
    return result


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def render_csv(result: SweepResult) -> str:
    """Versioned, byte-deterministic CSV (schema opcert-sweep/1)."""
    s = result.spec
    K = s.depth
    header_meta = (f"# opcert-sweep/1 version={VERSION} param={s.param} "
                   f"lo={_fmt(s.lo)} hi={_fmt(s.hi)} count={s.count} depth={K} "
                   f"engine={s.engine} grid_size={s.grid_size} tol={_fmt(s.tol)} seed={s.seed}")
    cols = ([s.param]
            + [f"M{k}" for k in range(1, K + 1)]
            + [f"err_M{k}" for k in range(1, K + 1)]
            + [f"e{k}" for k in range(1, K + 1)]
            + [f"err_e{k}" for k in range(1, K + 1)]
            + [f"e{k}_scaled" for k in range(1, K + 1)]  # e_k * k!
            + ["theta", "Z", "linear_entropy", "verdict", "witness"])
    lines = [header_meta, ",".join(cols)]
    for r in result.rows:
        scaled = [r.ek[k - 1] * math.factorial(k) for k in range(1, K + 1)]
        fields = ([_fmt(r.value)]
                  + [_fmt(v) for v in r.moments] + [_fmt(v) for v in r.moment_errs]
                  + [_fmt(v) for v in r.ek] + [_fmt(v) for v in r.ek_errs]
                  + [_fmt(v) for v in scaled]
                  + ["".join("1" if b else "0" for b in r.theta),
                     _fmt(r.z), _fmt(r.lin_entropy), r.verdict,
                     r.witness.replace(",", ";")])
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"
