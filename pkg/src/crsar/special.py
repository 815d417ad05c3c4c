"""Special functions used by the Cauchy-Rician density and the baselines.

``ellip_e`` takes the elliptic *modulus* k, not the parameter m = k**2 that
``scipy.special.ellipe`` expects. Mixing the two silently gives wrong
densities, so every caller in this package passes k.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

from .errors import DomainError

_AGM_TOL = 1e-15
_AGM_MAXITER = 64
_NEAR_ONE = 1e-4  # complementary modulus below which the log expansion is used

# Unscaled I0 refuses arguments at or beyond this point; the scaled variant
# should be used instead (I0(x) ~ e^x / sqrt(2 pi x) nears the float64 limit).
I0_OVERFLOW_X = 700.0


def _as_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def ellip_e(k):
    """Complete elliptic integral of the second kind, E(k).

    Evaluated with the arithmetic-geometric mean, or with the logarithmic
    expansion in the complementary modulus when that is below 1e-4. ``k``
    is the modulus in [0, 1]; scalars and arrays are accepted.
    """
    scalar = np.ndim(k) == 0
    k = _as_array(k, "k")
    if np.any((k < 0.0) | (k > 1.0)):
        raise DomainError("elliptic modulus must lie in [0, 1]")
    k = np.atleast_1d(k)
    out = np.empty_like(k)

    kp = np.sqrt((1.0 - k) * (1.0 + k))
    # near k = 1 the AGM loses a few ulps to the log growth of K(k);
    # the two-term log expansion is exact to double precision there
    near = kp < _NEAR_ONE
    kn = kp[near]
    with np.errstate(divide="ignore", invalid="ignore"):
        log4 = np.log(4.0 / kn)
        series = 1.0 + 0.5 * kn * kn * (log4 - 0.5) + 0.1875 * kn**4 * (log4 - 13.0 / 12.0)
    out[near] = np.where(kn == 0.0, 1.0, series)

    kk = k[~near]
    a = np.ones_like(kk)
    b = kp[~near]
    c = kk
    total = 0.5 * c * c
    power = 0.5
    for _ in range(_AGM_MAXITER):
        if np.all(np.abs(c) <= _AGM_TOL * a):
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        power *= 2.0
        total = total + power * c * c
    out[~near] = math.pi / (2.0 * a) * (1.0 - total)
    return _ret(out[0] if scalar else out, scalar)


def bessel_j0(x):
    """Bessel function of the first kind of order zero."""
    scalar = np.ndim(x) == 0
    arr = _as_array(x, "x")
    return _ret(_sp.j0(arr), scalar)


def bessel_i0(x):
    """Modified Bessel function I0 for 0 <= x < 700.

    Raises ``OverflowError`` from 700 upward; use :func:`bessel_i0e` there.
    """
    scalar = np.ndim(x) == 0
    arr = _as_array(x, "x")
    if np.any(arr < 0.0):
        raise DomainError("bessel_i0 requires x >= 0")
    if np.any(arr >= I0_OVERFLOW_X):
        raise OverflowError("bessel_i0 overflows for x >= 700; use bessel_i0e")
    # scipy can return 1 - 3 ulp for tiny x; I0 >= 1 holds exactly
    return _ret(np.maximum(_sp.i0(arr), 1.0), scalar)


def bessel_i0e(x):
    """Exponentially scaled I0: exp(-x) * I0(x), finite for all x >= 0."""
    scalar = np.ndim(x) == 0
    arr = _as_array(x, "x")
    if np.any(arr < 0.0):
        raise DomainError("bessel_i0e requires x >= 0")
    return _ret(_sp.i0e(arr), scalar)


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    scalar = np.ndim(x) == 0
    arr = _as_array(x, "x")
    if np.any(arr <= 0.0):
        raise DomainError("log_gamma requires x > 0")
    return _ret(_sp.gammaln(arr), scalar)
