"""Method-of-algebraic-moments estimation of (gamma, delta).

For a Cauchy-Rician amplitude ``x`` and any constant ``a > 0``::

    E[(x^2 + a^2)^(-1/2)] = 1 / sqrt((gamma + a)^2 + delta^2)
    E[(x^2 + a^2)^(-3/2)] = (gamma + a) / (a [(gamma + a)^2 + delta^2]^(3/2))

Replacing the expectations with sample means ``e1`` and ``e2`` and solving
gives ``gamma = a (e2 / e1^3 - 1)`` and ``delta^2 = e1^-2 - (gamma + a)^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError

# Rows per chunk when accumulating moments; keeps temporaries small for n ~ 1e8.
_CHUNK = 1 << 20


@dataclass(frozen=True)
class MomentPair:
    e1: float
    e2: float
    a: float
    n: int

    def __post_init__(self):
        a = self.a
        if not (0.0 < self.e1 <= 1.0 / a and 0.0 < self.e2 <= 1.0 / a**3):
            raise DomainError("moments out of range for the given constant a")


@dataclass(frozen=True)
class ParamEstimate:
    gamma_hat: float
    delta_hat: float
    a_used: float
    delta_clamped: bool = False
    gamma_nonpositive: bool = False

    @property
    def diagnostics(self) -> dict:
        return {
            "delta_clamped": self.delta_clamped,
            "gamma_nonpositive": self.gamma_nonpositive,
        }


def _check_a(a) -> float:
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise DomainError(f"moment constant a must be finite and > 0, got {a}")
    return a


def _as_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise DataError("data is empty")
    if not np.all(np.isfinite(x)):
        raise DataError("data contains non-finite values")
    if np.any(x < 0.0):
        raise DataError("amplitudes must be >= 0")
    return x


class MomentAccumulator:
    """Streaming accumulator for the two algebraic moments.

    Partial sums are kept exactly rounded with :func:`math.fsum`, so chunked
    or merged accumulation agrees with a single pass to within one rounding.
    """

    def __init__(self, a: float):
        self.a = _check_a(a)
        self.s1 = 0.0
        self.s2 = 0.0
        self.n = 0

    def update(self, chunk) -> "MomentAccumulator":
        x = _as_data(chunk)
        a = self.a
        for start in range(0, x.size, _CHUNK):
            part = x[start:start + _CHUNK]
            if part.max() < 1e150:
                t1 = 1.0 / np.sqrt(part * part + a * a)
            else:
                t1 = 1.0 / np.hypot(part, a)
            self.s1 = math.fsum((self.s1, math.fsum(t1.tolist())))
            self.s2 = math.fsum((self.s2, math.fsum((t1 * t1 * t1).tolist())))
        self.n += x.size
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.a != self.a:
            raise DomainError("cannot merge accumulators with different a")
        self.s1 = math.fsum((self.s1, other.s1))
        self.s2 = math.fsum((self.s2, other.s2))
        self.n += other.n
        return self

    def result(self) -> MomentPair:
        if self.n == 0:
            raise DataError("no data accumulated")
        return MomentPair(self.s1 / self.n, self.s2 / self.n, self.a, self.n)


def empirical_moments(data, a: float) -> MomentPair:
    """Sample means of (x^2 + a^2)^(-1/2) and (x^2 + a^2)^(-3/2)."""
    return MomentAccumulator(a).update(data).result()


def solve_moments(e1: float, e2: float, a: float) -> ParamEstimate:
    """Invert the two moment equations for a single constant ``a``."""
    a = _check_a(a)
    if not e1 > 0.0:
        raise DomainError("first moment must be > 0")
    r = e2 / e1**3
    gamma = a * (r - 1.0)
    # e1^-2 - (gamma + a)^2 with gamma + a = a r, factored as
    # e1^-6 (e1^2 - a e2)(e1^2 + a e2) to limit rounding in the difference
    radicand = (e1 * e1 - a * e2) * (e1 * e1 + a * e2) / e1**6
    clamped = radicand < 0.0
    delta = 0.0 if clamped else math.sqrt(radicand)
    return ParamEstimate(gamma, delta, a, clamped, gamma <= 0.0)


def estimate(data, a: float) -> ParamEstimate:
    """Two-moment estimate of (gamma, delta) from amplitude data."""
    m = empirical_moments(data, a)
    return solve_moments(m.e1, m.e2, m.a)


def solve_single_moment(e1_a1: float, e1_a2: float, a1: float, a2: float) -> ParamEstimate:
    """Invert the first moment equation at two constants ``a1 != a2``."""
    a1, a2 = _check_a(a1), _check_a(a2)
    if a1 == a2:
        raise DomainError("a1 and a2 must differ")
    q1, q2 = e1_a1**-2, e1_a2**-2
    # q1 - q2 = (a1 - a2)(2 gamma + a1 + a2)
    gamma = 0.5 * ((q1 - q2) / (a1 - a2) - a1 - a2)
    radicand = q1 - (gamma + a1) ** 2
    clamped = radicand < 0.0
    delta = 0.0 if clamped else math.sqrt(radicand)
    return ParamEstimate(gamma, delta, a1, clamped, gamma <= 0.0)


def estimate_single_moment(data, a1: float, a2: float) -> ParamEstimate:
    """Estimate from the first algebraic moment evaluated at two constants."""
    a1, a2 = _check_a(a1), _check_a(a2)
    if a1 == a2:
        raise DomainError("a1 and a2 must differ")
    x = _as_data(data)
    return solve_single_moment(empirical_moments(x, a1).e1, empirical_moments(x, a2).e1, a1, a2)


def choose_a(data, mode: str = "mean") -> float:
    """Pick the moment constant from the data (sample mean, or median).

    Falls back to the median, then to 1.0, whenever the preferred value is
    not a finite positive number.
    """
    x = _as_data(data)
    if mode not in ("mean", "median"):
        raise DomainError(f"unknown a-selection mode {mode!r}")
    with np.errstate(over="ignore"):
        candidates = [float(np.mean(x)), float(np.median(x))]
    if mode == "median":
        candidates.reverse()
    for c in candidates:
        if math.isfinite(c) and c > 0.0:
            return c
    return 1.0
