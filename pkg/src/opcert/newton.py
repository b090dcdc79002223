"""Moments to elementary symmetric polynomials, and the countable positivity tests.

The production path is the O(K^2) recursion

    k e_k = sum_{i=1}^{k} (-1)^{i-1} e_{k-i} M_i,

algebraically equivalent to the determinant form (kept as a cross-check for
k <= 12).  e_k decays like 1/k! while the recursion summands do not, so the
relative cancellation grows factorially; the computation escalates to
50-digit arithmetic (mpmath) when K > 24 or the cancellation ratio of any
entry exceeds CANCEL_RATIO.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

_EPS = np.finfo(float).eps

# partial-sum magnitude over |k e_k| above which the entry is flagged as
# cancellation-dominated; escalation to extended precision happens earlier,
# keeping accepted float64 values near 1e-11 relative error
CANCEL_RATIO = 1e6
ESCALATE_RATIO = 1e4
ESCALATE_DIGITS = 50
ESCALATE_ABOVE_K = 24

DET_MAX_K = 12


@dataclass(frozen=True)
class MomentVector:
    """M_1..M_K with per-entry absolute error estimates."""

    values: np.ndarray
    errors: np.ndarray
    source: str = "unknown"  # band | nystrom | closed-form

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "errors", np.asarray(self.errors, dtype=float))
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("need at least M_1")
        if self.errors.shape != self.values.shape:
            raise ValueError("errors must match values in shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("moments must be finite")
        if np.any(self.errors < 0):
            raise ValueError("error estimates must be non-negative")

    @property
    def K(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SymPolyVector:
    """e_1..e_K (e_0 = 1 implicit) with propagated errors and conditioning flags."""

    values: np.ndarray
    errors: np.ndarray
    cancellation: np.ndarray  # bool per entry: partial sums exceeded |e_k| by CANCEL_RATIO
    source: str = "unknown"
    extended_precision: bool = False

    @property
    def K(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ThetaProfile:
    """theta_k = 1 iff e_i >= -tol_i for all i <= k; monotone non-increasing."""

    bits: np.ndarray  # bool, index k-1 -> theta_k

    @property
    def k_max(self) -> int:
        return self.bits.size

    @property
    def certified_depth(self) -> int:
        """Largest k with theta_k = 1 (0 if already theta_1 = 0)."""
        if self.bits.all():
            return self.bits.size
        return int(np.argmin(self.bits))


def _recursion_float(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    K = M.size
    e = np.zeros(K + 1)
    e[0] = 1.0
    max_partial = np.zeros(K + 1)
    for k in range(1, K + 1):
        s = 0.0
        mp = 0.0
        for i in range(1, k + 1):
            s += (1.0 if i % 2 else -1.0) * e[k - i] * M[i - 1]
            mp = max(mp, abs(s))
        e[k] = s / k
        max_partial[k] = mp
    return e[1:], max_partial[1:]


def _recursion_mp(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with mpmath.workdps(ESCALATE_DIGITS):
        e = [mpmath.mpf(1)]
        max_partial = []
        for k in range(1, M.size + 1):
            s = mpmath.mpf(0)
            mp = mpmath.mpf(0)
            for i in range(1, k + 1):
                s += (1 if i % 2 else -1) * e[k - i] * mpmath.mpf(M[i - 1])
                mp = max(mp, abs(s))
            e.append(s / k)
            max_partial.append(mp)
        return (np.array([float(v) for v in e[1:]]),
                np.array([float(v) for v in max_partial]))


def newton_ek(M: MomentVector) -> SymPolyVector:
    """Convert moments to elementary symmetric polynomials with error tracking.

    Errors are the first-order sensitivity of the recursion to the moment
    errors plus the rounding floor of the partial sums; entries whose partial
    sums exceeded |k e_k| by more than CANCEL_RATIO are flagged, and the whole
    vector is recomputed in extended precision when that happens (or when
    K > ESCALATE_ABOVE_K), which removes the rounding term but not the
    moment-error term.
    """
    vals, max_partial = _recursion_float(M.values)
    k_idx = np.arange(1, M.K + 1)
    scale = np.maximum(k_idx * np.abs(vals), 1e-300)
    cancel = max_partial > CANCEL_RATIO * scale
    extended = bool((max_partial > ESCALATE_RATIO * scale).any()) or M.K > ESCALATE_ABOVE_K
    if extended:
        vals, max_partial = _recursion_mp(M.values)
        rounding = np.abs(vals) * 1e-15  # float64 readout of the 50-digit result
    else:
        rounding = 4.0 * _EPS * max_partial / k_idx

    # first-order propagation of moment errors through the recursion
    errs = np.zeros(M.K + 1)
    abs_e = np.concatenate(([1.0], np.abs(vals)))
    for k in range(1, M.K + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += abs_e[k - i] * M.errors[i - 1] + abs(M.values[i - 1]) * errs[k - i]
        errs[k] = acc / k
    return SymPolyVector(values=vals, errors=errs[1:] + rounding, cancellation=cancel,
                         source=M.source, extended_precision=extended)


def newton_ek_determinant(M: MomentVector, k: int) -> float:
    """e_k via the k x k determinant; cross-check route only (k <= 12)."""
    if not 1 <= k <= DET_MAX_K:
        raise ValueError(f"determinant route limited to 1 <= k <= {DET_MAX_K}")
    if k > M.K:
        raise ValueError("k exceeds available moments")
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1):
            D[i, j] = M.values[i - j]
        if i + 1 < k:
            D[i, i + 1] = i + 1
    return float(np.linalg.det(D) / math.factorial(k))


def theta_profile(e: SymPolyVector, tol: float | None = None) -> ThetaProfile:
    """Indicator bits: theta_k = 1 iff e_i >= -max(tol, err_i) for all i <= k.

    With tol=None the per-entry error estimates alone set the thresholds.
    """
    if tol is not None and tol < 0:
        raise ValueError("tol must be >= 0")
    thresholds = e.errors if tol is None else np.maximum(e.errors, tol)
    ok = e.values >= -thresholds
    return ThetaProfile(bits=np.logical_and.accumulate(ok))


def first_negative(e: SymPolyVector) -> int | None:
    """Smallest k with e_k < -3 err_k (witness-grade negativity), or None."""
    neg = e.values < -3.0 * e.errors
    if not neg.any():
        return None
    return int(np.argmax(neg)) + 1


def linear_entropy(M: MomentVector, m1_tol: float = 1e-8) -> float | None:
    """1 - M_2 (equals 2 e_2 at unit trace); None if the input is un-normalized."""
    if M.K < 2:
        raise ValueError("need M_2 for the linear entropy")
    if abs(M.values[0] - 1.0) > max(m1_tol, 3.0 * M.errors[0]):
        return None
    return float(1.0 - M.values[1])


@dataclass(frozen=True)
class BoundCheck:
    """Result of the |e_k| <= S1^k / k! sanity bound."""

    violations: list[int] = field(default_factory=list)
    margins: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def ok(self) -> bool:
        return not self.violations


def ek_bound_check(e: SymPolyVector, S1: float) -> BoundCheck:
    """Flag entries violating |e_k| <= S1^k/k! beyond their error bars.

    S1 must upper-bound the trace norm (sum |lambda_n|); a violation indicates
    numerical corruption upstream, not a property of the operator.
    """
    if S1 < 0:
        raise ValueError("S1 must be >= 0")
    k = np.arange(1, e.K + 1)
    log_bound = k * math.log(S1) - np.array([math.lgamma(kk + 1) for kk in k]) if S1 > 0 \
        else np.full(e.K, -math.inf)
    bounds = np.exp(log_bound)
    margins = bounds * (1 + 1e-12) + e.errors - np.abs(e.values)
    violations = [int(kk) for kk in k[margins < 0]]
    return BoundCheck(violations=violations, margins=margins)
