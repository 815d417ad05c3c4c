"""The Cauchy-Rician amplitude distribution.

The amplitude of a complex signal whose real and imaginary parts follow a
circular-bivariate Cauchy law with scale ``gamma`` and component locations
``(delta1, delta2)``. The amplitude law depends on the locations only through
``delta = hypot(delta1, delta2)``.

The production density is the elliptic-integral closed form::

    f(x) = 2 gamma x E(k) / (pi [gamma^2 + (x - delta)^2] sqrt(gamma^2 + (x + delta)^2))
    k    = sqrt(4 x delta) / sqrt(gamma^2 + (x + delta)^2)

:func:`pdf_oracle` evaluates the Bessel-integral representation
``x * int_0^inf w exp(-gamma w) J0(w delta) J0(w x) dw`` by quadrature and is
meant for cross-checking only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as _sp

from .errors import ConvergenceError, DomainError
from .special import bessel_j0, ellip_e


@dataclass(frozen=True)
class CrParams:
    """Scale ``gamma`` (> 0) and unified location ``delta`` (>= 0)."""

    gamma: float
    delta: float

    def __post_init__(self):
        g, d = float(self.gamma), float(self.delta)
        if not (math.isfinite(g) and math.isfinite(d)):
            raise DomainError("gamma and delta must be finite")
        if g <= 0.0:
            raise DomainError(f"gamma must be > 0, got {g}")
        if d < 0.0:
            raise DomainError(f"delta must be >= 0, got {d}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "delta", d)


def _check_a(a: float) -> float:
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise DomainError(f"moment constant a must be finite and > 0, got {a}")
    return a


def _amplitudes(x, strict_positive=False):
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("amplitude must be finite")
    if strict_positive:
        if np.any(arr <= 0.0):
            raise DomainError("amplitude must be > 0")
    elif np.any(arr < 0.0):
        raise DomainError("amplitude must be >= 0")
    return arr, scalar


def _modulus(g, d, x, s_plus):
    # sqrt(4xd) / sqrt(g^2 + (x+d)^2) in that order; rounding can nudge it past 1
    k = np.sqrt(4.0 * x * d) / s_plus
    return np.minimum(k, 1.0)


def pdf(p: CrParams, x):
    """Closed-form density at amplitude(s) ``x >= 0``."""
    x, scalar = _amplitudes(x)
    g, d = p.gamma, p.delta
    s_plus = np.hypot(g, x + d)
    s_minus_sq = np.hypot(g, x - d) ** 2
    k = _modulus(g, d, x, s_plus)
    out = 2.0 * g * x * ellip_e(k) / (math.pi * s_minus_sq * s_plus)
    return float(out) if scalar else out


def log_pdf(p: CrParams, x):
    """Log-density at ``x > 0``, built from the log of each factor."""
    x, scalar = _amplitudes(x, strict_positive=True)
    g, d = p.gamma, p.delta
    s_plus = np.hypot(g, x + d)
    s_minus = np.hypot(g, x - d)
    k = _modulus(g, d, x, s_plus)
    out = (
        math.log(2.0 * g / math.pi)
        + np.log(x)
        + np.log(ellip_e(k))
        - 2.0 * np.log(s_minus)
        - np.log(s_plus)
    )
    return float(out) if scalar else out


# Gauss-Legendre rule used on each quadrature panel of the oracle.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
# Integrate until the exp(-c w) envelope has fallen by e^-60.
_DECAY_SPAN = 60.0


def _oracle_direct(g, d, x, budget):
    # Panels of half a period of the faster J0, never wider than 0.5/gamma.
    h = min(math.pi / max(d, x), 0.5 / g)
    n_panels = int(math.ceil(_DECAY_SPAN / g / h))
    evals = n_panels * _GL_NODES.size
    if evals > budget:
        raise ConvergenceError(
            f"oracle quadrature needs {evals} evaluations, budget is {budget}"
        )
    left = np.arange(n_panels) * h
    w = left[:, None] + 0.5 * h * (_GL_NODES[None, :] + 1.0)
    f = w * np.exp(-g * w) * bessel_j0(w * d) * bessel_j0(w * x)
    panels = 0.5 * h * (f @ _GL_WEIGHTS)
    return math.fsum(panels), evals


def _oracle_rotated(g, d, x, budget, rtol):
    # Write J0(w b) = Re H0(w b) for the larger of (x, delta) and rotate the
    # w-contour onto the imaginary axis. The integrand becomes
    # (2/pi) t sin(g t) I0(s t) K0(b t), decaying like exp(-(b - s) t).
    b, s = max(x, d), min(x, d)
    c = b - s
    end = _DECAY_SPAN / c

    def f(t):
        return t * math.sin(g * t) * _sp.i0e(s * t) * _sp.k0e(b * t) * math.exp(-c * t)

    edges = np.append(np.arange(0.0, end, math.pi / g), end)
    if edges.size - 1 > budget // 21:
        raise ConvergenceError("oracle quadrature exceeds its evaluation budget")
    parts = []
    errs = []
    evals = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, info = integrate.quad(
            f, lo, hi, epsabs=0.0, epsrel=rtol, limit=200, full_output=True
        )[:3]
        evals += info["neval"]
        parts.append(val)
        errs.append(err)
    if evals > budget:
        raise ConvergenceError("oracle quadrature exceeds its evaluation budget")
    if math.fsum(errs) > 1e-10 * math.fsum(abs(v) for v in parts):
        raise ConvergenceError("oracle quadrature missed its tolerance")
    return 2.0 / math.pi * math.fsum(parts), evals


def pdf_oracle(p: CrParams, x: float, *, rtol: float = 1e-12, budget: int = 1_000_000) -> float:
    """Density from the Bessel-integral representation, by quadrature.

    Two routes evaluate the same integral. Along the real axis the integral
    is summed over half-period panels of the oscillating J0 factors. When
    ``|x - delta|`` is large compared with ``gamma`` that sum cancels badly,
    and the contour rotated onto the imaginary axis is used instead. The
    route with fewer panels is chosen.

    Raises :class:`ConvergenceError` when the evaluation budget or the
    tolerance cannot be met.
    """
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError("amplitude must be finite and >= 0")
    if x == 0.0:
        return 0.0
    g, d = p.gamma, p.delta
    b, s = max(x, d), min(x, d)
    direct_cost = _DECAY_SPAN * b / (math.pi * g)
    rotated_cost = (
        _DECAY_SPAN * max(g / math.pi, b - s) / (b - s) if b > s else math.inf
    )
    if rotated_cost < direct_cost:
        integral, _ = _oracle_rotated(g, d, x, budget, rtol)
    else:
        integral, _ = _oracle_direct(g, d, x, budget)
    return x * integral


def _cdf_scalar(p: CrParams, x: float, tol: float) -> float:
    if x == 0.0:
        return 0.0
    g, d = p.gamma, p.delta
    # Break points around the mode region, then geometric steps into the tail.
    pts = {0.0, x}
    for v in (d - 10 * g, d - g, d, d + g, d + 10 * g, g, 10 * g):
        if 0.0 < v < x:
            pts.add(v)
    top = max(d + 10 * g, 10 * g)
    while top * 10 < x:
        top *= 10
        pts.add(top)
    edges = sorted(pts)
    total = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(
            lambda t: pdf(p, t), lo, hi, epsabs=tol / len(edges), epsrel=tol, limit=500
        )
        if err > max(tol / len(edges), tol * abs(val)) * 10:
            raise ConvergenceError(f"cdf quadrature on [{lo}, {hi}] missed tolerance")
        total.append(val)
    return min(math.fsum(total), 1.0)


def cdf(p: CrParams, x, *, tol: float = 1e-9):
    """Distribution function by adaptive quadrature of :func:`pdf`.

    Scalars are integrated directly. For arrays the CDF is first computed on
    knots (adaptive quadrature per knot interval) and each point is then
    reached from the knot below it with a 32-point Gauss-Legendre rule.
    """
    x, scalar = _amplitudes(x)
    if scalar:
        return _cdf_scalar(p, float(x), tol)
    return _cdf_array(p, x, tol)


_GL32_NODES, _GL32_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _cdf_knots(p: CrParams, upper: float):
    g, d = p.gamma, p.delta
    lo = min(g, d if d > 0 else g) * 1e-4
    knots = [np.array([0.0]), np.geomspace(lo, max(upper, lo * 10), 64 * 12)]
    # dense knots around the peak, where the modulus approaches 1
    knots.append(np.linspace(max(d - 12 * g, 0.0), d + 12 * g, 193))
    knots = np.unique(np.concatenate(knots))
    knots = knots[knots <= max(upper, knots[1])]
    return knots


def _cdf_array(p, x, tol):
    flat = x.ravel()
    if flat.size == 0:
        return np.zeros_like(x)
    upper = float(flat.max())
    knots = _cdf_knots(p, upper)
    masses = np.empty(knots.size - 1)
    for i, (lo, hi) in enumerate(zip(knots[:-1], knots[1:])):
        val, err = integrate.quad(lambda t: pdf(p, t), lo, hi, epsabs=tol * 1e-3, epsrel=tol, limit=200)
        masses[i] = val
    cum = np.concatenate([[0.0], np.cumsum(masses)])
    idx = np.clip(np.searchsorted(knots, flat, side="right") - 1, 0, knots.size - 1)
    base = knots[idx]
    half = 0.5 * (flat - base)
    nodes = base[:, None] + half[:, None] * (_GL32_NODES[None, :] + 1.0)
    vals = pdf(p, nodes.ravel()).reshape(nodes.shape)
    out = cum[idx] + half * (vals @ _GL32_WEIGHTS)
    return np.minimum(out, 1.0).reshape(x.shape)


def moment1(p: CrParams, a: float) -> float:
    """Population value of E[(x^2 + a^2)^(-1/2)]."""
    a = _check_a(a)
    return 1.0 / math.hypot(p.gamma + a, p.delta)


def moment2(p: CrParams, a: float) -> float:
    """Population value of E[(x^2 + a^2)^(-3/2)]."""
    a = _check_a(a)
    return (p.gamma + a) / (a * math.hypot(p.gamma + a, p.delta) ** 3)
