"""Circle arithmetic, Diophantine minima and log-space bound formulas.

Angles live on the circle R/Z measured in turns, so that the distance to the
nearest integer is the natural circle metric.  Every count that can outgrow a
machine integer (the net sizes ``L``, ``M``, ``R``) is carried as a base-10
logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath
import numpy as np

from .errors import BoundOverflow, BudgetExceeded, DomainError

DEFAULT_SCAN_BUDGET = 10**9
HIGH_PRECISION_BITS = 128
LOG10_4PI = math.log10(4.0 * math.pi)


def _reduce(x: float) -> float:
    v = x % 1.0
    # -1e-20 % 1.0 rounds up to 1.0
    return 0.0 if v >= 1.0 else v


@dataclass(frozen=True, order=True)
class CircleAngle:
    """A point of the oriented unit circle, stored in turns in [0, 1)."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise DomainError(f"circle angle must be finite, got {self.value!r}")
        object.__setattr__(self, "value", _reduce(v))

    @classmethod
    def from_radians(cls, theta: float) -> "CircleAngle":
        return cls(theta / (2.0 * math.pi))

    @property
    def radians(self) -> float:
        return self.value * 2.0 * math.pi

    def __add__(self, other):
        return CircleAngle(self.value + _as_turns(other))

    __radd__ = __add__

    def __neg__(self):
        return CircleAngle(-self.value)

    def __sub__(self, other):
        return CircleAngle(self.value - _as_turns(other))

    def __mul__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            return NotImplemented
        return CircleAngle(float(Fraction(self.value) * int(n) % 1))

    __rmul__ = __mul__

    def __float__(self):
        return self.value


def _as_turns(x) -> float:
    return x.value if isinstance(x, CircleAngle) else float(x)


def signed_diff(x, y) -> float:
    """Signed angular difference ``x - y`` in (-1/2, 1/2] turns."""
    d = math.remainder(_as_turns(x) - _as_turns(y), 1.0)
    return 0.5 if d == -0.5 else d


def nearest_integer_distance(x: float) -> float:
    """Distance from ``x`` to the closest integer.

    ``math.remainder`` subtracts the nearest integer exactly, so the result is
    exact and symmetric: ``<-x> == <x>`` bit for bit.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"nearest_integer_distance needs a finite value, got {x!r}")
    return abs(math.remainder(x, 1.0))


def _dist_array(x: np.ndarray) -> np.ndarray:
    # same value as nearest_integer_distance, elementwise
    return np.abs(x - np.rint(x))


def pair_scan_size(k: int) -> int:
    """Number of nonzero lattice points (n, m) with |n| + |m| <= k."""
    return 2 * k * (k + 1)


def _check_k(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise DomainError(f"k must be an integer, got {k!r}")
    k = int(k)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    return k


def N_single_profile(alpha, k_max: int, budget: int = DEFAULT_SCAN_BUDGET) -> np.ndarray:
    """``out[k-1] = N_alpha(k)`` for k = 1..k_max."""
    k_max = _check_k(k_max)
    if k_max > budget:
        raise BudgetExceeded(
            f"N_single scan needs {k_max} candidates, budget is {budget}",
            required=k_max, budget=budget)
    a = _as_turns(alpha)
    n = np.arange(1, k_max + 1)
    return np.minimum.accumulate(_dist_array(n * a))


def N_single(alpha, k: int, budget: int = DEFAULT_SCAN_BUDGET) -> float:
    """min of <n alpha> over 1 <= |n| <= k."""
    return float(N_single_profile(alpha, k, budget)[-1])


def N_pair_profile(alpha, beta, k_max: int, budget: int = DEFAULT_SCAN_BUDGET) -> np.ndarray:
    """``out[k-1] = N_ab(k)`` for k = 1..k_max.

    Only the half plane n > 0 or (n == 0, m > 0) is scanned; the other half
    gives identical distances because <-x> == <x> exactly.
    """
    k_max = _check_k(k_max)
    size = pair_scan_size(k_max)
    if size > budget:
        raise BudgetExceeded(
            f"N_pair scan needs {size} candidates, budget is {budget}",
            required=size, budget=budget)
    a = _as_turns(alpha)
    b = _as_turns(beta)
    shell_min = np.full(k_max + 1, np.inf)
    for n in range(0, k_max + 1):
        r = k_max - n
        m = np.arange(1 if n == 0 else -r, r + 1)
        if m.size == 0:
            continue
        d = _dist_array(n * a + m * b)
        np.minimum.at(shell_min, n + np.abs(m), d)
    return np.minimum.accumulate(shell_min[1:])


def N_pair(alpha, beta, k: int, budget: int = DEFAULT_SCAN_BUDGET) -> float:
    """min of <n alpha + m beta> over 1 <= |n| + |m| <= k."""
    return float(N_pair_profile(alpha, beta, k, budget)[-1])


def _check_pq(p, q):
    for name, v in (("p", p), ("q", q)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v!r}")


def _check_eps(eps):
    if not (isinstance(eps, (int, float)) and math.isfinite(eps) and 0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")


def log10_L_from_log_eps(p: int, q: int, log10_eps: float) -> float:
    """log10 of 4*pi*(p+q) * 100**(2(p+q)) / eps**(2(p+q)), eps given by its log."""
    s = p + q
    return LOG10_4PI + math.log10(s) + 2 * s * (2.0 - log10_eps)


def L_bound(p: int, q: int, eps: float, *, high_precision: bool = False):
    """log10 L(p, q, eps), the connected-sequence length that forces an eps-net.

    With ``high_precision`` the value is an ``mpmath.mpf`` evaluated at 128 bits.
    """
    _check_pq(p, q)
    _check_eps(eps)
    if high_precision:
        with mpmath.workprec(HIGH_PRECISION_BITS):
            s = p + q
            e = mpmath.mpf(eps)
            return (mpmath.log10(4 * mpmath.pi * s)
                    + 2 * s * (2 - mpmath.log10(e)))
    return log10_L_from_log_eps(p, q, math.log10(eps))


@dataclass(frozen=True)
class BoundReport:
    p: int
    q: int
    eps: float
    log10_L: float
    log10_M: float
    log10_R: float
    n_index: int

    def to_dict(self) -> dict:
        return {
            "p": self.p, "q": self.q, "eps": self.eps, "n_index": self.n_index,
            "L": {"log10": self.log10_L},
            "M": {"log10": self.log10_M},
            "R": {"log10": self.log10_R},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        return cls(p=d["p"], q=d["q"], eps=d["eps"], n_index=d["n_index"],
                   log10_L=d["L"]["log10"], log10_M=d["M"]["log10"],
                   log10_R=d["R"]["log10"])


def _bounds_from_log_eps(p, q, log10_eps):
    log10_L = log10_L_from_log_eps(p, q, log10_eps)
    if log10_L > 300:
        raise BoundOverflow(
            f"L(p={p}, q={q}) = 10^{log10_L:.6g} is too large to exponentiate; "
            "log10 R would not be a finite float")
    log10_R = 10.0 ** log10_L * (2.0 - log10_eps)
    if not math.isfinite(log10_R):
        raise BoundOverflow(f"log10 R overflows for p={p}, q={q}, log10 eps={log10_eps}")
    return log10_L, log10_R, log10_R + log10_L


def M_of_eps(p: int, q: int, eps: float) -> BoundReport:
    """Log-space L, R = (100/eps)^L and M = R * L for the pair (p, q)."""
    _check_pq(p, q)
    _check_eps(eps)
    log10_L, log10_R, log10_M = _bounds_from_log_eps(p, q, math.log10(eps))
    return BoundReport(p=int(p), q=int(q), eps=float(eps), log10_L=log10_L,
                       log10_M=log10_M, log10_R=log10_R,
                       n_index=math.floor(1.0 / eps) + 1)


def log10_M_from_log_eps(p: int, q: int, log10_eps: float) -> float:
    """log10 M for an eps known only through its logarithm."""
    _check_pq(p, q)
    if not log10_eps < 0:
        raise DomainError("eps must lie in (0, 1)")
    return _bounds_from_log_eps(p, q, log10_eps)[2]


@dataclass(frozen=True)
class Theorem1Check:
    status: str  # "holds", "fails" or "indeterminate"
    log10_lhs: float
    log10_rhs: float | None
    log10_L: float
    reason: str = ""

    @property
    def holds(self) -> bool | None:
        return None if self.status == "indeterminate" else self.status == "holds"


def theorem1_inequality_check(alpha, beta, p: int, q: int, n: int, *,
                              budget: int = DEFAULT_SCAN_BUDGET,
                              L_override: int | None = None) -> Theorem1Check:
    """Evaluate |a/b - p/q| < N_{b/q}(L) / (100 b (100 n)^L) in log10 space.

    ``L = L(p, q, 1/n)``.  ``N`` is scanned up to ``floor(L)``; when that scan
    exceeds ``budget`` the result is indeterminate.  ``L_override`` replaces L
    (testing hook for small synthetic values).
    """
    _check_pq(p, q)
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    a = _as_turns(alpha)
    b = _as_turns(beta)
    if b == 0.0:
        raise DomainError("beta must be nonzero")
    diff = abs(a / b - p / q)
    log10_lhs = math.log10(diff) if diff > 0 else -math.inf

    if L_override is not None:
        L = float(L_override)
        log10_L = math.log10(L)
    else:
        # eps = 1/n may equal 1 here, so the (0, 1) guard of L_bound is bypassed
        log10_L = log10_L_from_log_eps(p, q, -math.log10(n))
        L = 10.0 ** log10_L
    k = math.floor(L)
    if k < 1 or k > budget:
        return Theorem1Check("indeterminate", log10_lhs, None, log10_L,
                             reason=f"N scan over k={k:.6g} exceeds budget {budget}")
    try:
        N = N_single(b / q, k, budget)
    except BudgetExceeded as exc:
        return Theorem1Check("indeterminate", log10_lhs, None, log10_L, reason=str(exc))
    if N == 0.0:
        return Theorem1Check("indeterminate", log10_lhs, None, log10_L,
                             reason="N_{beta/q}(L) vanished: beta/q is rational at this scale")
    log10_rhs = math.log10(N) - math.log10(100.0 * b) - L * math.log10(100.0 * n)
    status = "holds" if log10_lhs < log10_rhs else "fails"
    return Theorem1Check(status, log10_lhs, log10_rhs, log10_L)


def continued_fraction(x, depth: int | None = None) -> list[int]:
    """Partial quotients of the exact rational value of ``x``."""
    fx = Fraction(x)
    out = []
    while depth is None or len(out) < depth:
        a = math.floor(fx)
        out.append(a)
        rem = fx - a
        if rem == 0:
            break
        fx = 1 / rem
    return out


def convergents_from_quotients(quotients: Iterable[int]) -> list[tuple[int, int]]:
    p0, q0, p1, q1 = 1, 0, 0, 1
    out = []
    for a in quotients:
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
        out.append((p0, q0))
    return out


def convergents(x: float, depth: int) -> list[tuple[int, int]]:
    """First ``depth`` continued-fraction convergents p/q of ``x``.

    The expansion runs on the exact binary value of the float, so it stops
    early for inputs with a short expansion (0.5 -> 0/1, 1/2).
    """
    if not math.isfinite(x):
        raise DomainError(f"convergents needs a finite value, got {x!r}")
    if depth < 1:
        raise DomainError("depth must be >= 1")
    return convergents_from_quotients(continued_fraction(x, depth))


def first_small_multiple(theta: Fraction, delta: Fraction, *, max_terms: int = 10_000) -> int:
    """Smallest j >= 1 with <j * theta> < delta.

    Successive minima of <j theta> occur exactly at convergent denominators, so
    the first j that drops below ``delta`` is one of them.
    """
    theta = Fraction(theta) % 1
    if delta <= 0:
        raise DomainError("delta must be positive")
    if theta == 0:
        return 1
    a = math.floor(theta)
    rem = theta - a
    p0, q0, p1, q1 = a, 1, 1, 0
    for _ in range(max_terms):
        if q0 >= 1 and _frac_dist(q0 * theta) < delta:
            return q0
        if rem == 0:
            break
        x = 1 / rem
        a = math.floor(x)
        rem = x - a
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
    raise DomainError("no multiple found within the expansion of theta")


def _frac_dist(x: Fraction) -> Fraction:
    f = x - math.floor(x)
    return min(f, 1 - f)
