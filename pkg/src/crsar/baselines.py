"""Comparison amplitude models: Rician, Weibull, log-normal and G0.

Each model has a density and a quick fitter. The fitters are chosen for
speed, not optimality:

* log-normal: closed-form maximum likelihood,
* Weibull: maximum likelihood, Newton iteration on the shape,
* Rician: mean/second-moment inversion, falling back to Rayleigh,
* G0: log-cumulant matching with the number of looks held fixed.

G0 amplitude density (Frery et al. 1997), roughness ``alpha < 0``, scale
``gamma > 0``, looks ``n``::

    f(x) = 2 n^n Gamma(n - alpha) gamma^(-alpha) x^(2n-1)
           / (Gamma(n) Gamma(-alpha) (gamma + n x^2)^(n - alpha))
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize
from scipy import special as _sp

from .errors import ConvergenceError, DataError, DomainError
from .special import bessel_i0e, log_gamma


class ModelKind(str, Enum):
    RICIAN = "rician"
    WEIBULL = "weibull"
    LOGNORMAL = "lognormal"
    G0 = "g0"


# Parameter names per model, in the order stored in BaselineModel.params.
PARAM_NAMES = {
    ModelKind.RICIAN: ("nu", "sigma"),
    ModelKind.WEIBULL: ("shape", "scale"),
    ModelKind.LOGNORMAL: ("mu", "s"),
    ModelKind.G0: ("alpha", "gamma", "looks"),
}

FIT_METHODS = {
    ModelKind.RICIAN: "moment inversion (mean, second moment); Rayleigh fallback",
    ModelKind.WEIBULL: "maximum likelihood, Newton on shape",
    ModelKind.LOGNORMAL: "maximum likelihood (closed form)",
    ModelKind.G0: "log-cumulant matching, looks fixed",
}


@dataclass(frozen=True)
class BaselineModel:
    kind: ModelKind
    params: tuple
    degenerate: bool = False
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if len(p) != len(PARAM_NAMES[kind]):
            raise DomainError(f"{kind.value} takes parameters {PARAM_NAMES[kind]}")
        if not all(math.isfinite(v) for v in p):
            raise DomainError("model parameters must be finite")
        if self.degenerate:
            return
        if kind is ModelKind.RICIAN and not (p[0] >= 0 and p[1] > 0):
            raise DomainError("rician needs nu >= 0, sigma > 0")
        if kind is ModelKind.WEIBULL and not (p[0] > 0 and p[1] > 0):
            raise DomainError("weibull needs shape > 0, scale > 0")
        if kind is ModelKind.LOGNORMAL and not p[1] > 0:
            raise DomainError("lognormal needs s > 0")
        if kind is ModelKind.G0 and not (p[0] < 0 and p[1] > 0 and p[2] >= 1):
            raise DomainError("g0 needs alpha < 0, gamma > 0, looks >= 1")

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES[self.kind], self.params))

    def pdf(self, x):
        return baseline_pdf(self, x)


def _support(x, positive):
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("x must be finite")
    if positive and np.any(arr <= 0):
        raise DomainError("x must be > 0 for this model")
    if np.any(arr < 0):
        raise DomainError("x must be >= 0")
    return arr, scalar


def baseline_pdf(m: BaselineModel, x):
    if m.degenerate:
        raise DomainError(f"degenerate {m.kind.value} fit has no density")
    x, scalar = _support(x, m.kind is ModelKind.LOGNORMAL)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if m.kind is ModelKind.RICIAN:
            nu, sigma = m.params
            s2 = sigma * sigma
            z = x * nu / s2
            # exp(-(x^2 + nu^2)/2s^2) I0(z) = exp(-(x - nu)^2 / 2s^2) I0e(z)
            out = x / s2 * np.exp(-((x - nu) ** 2) / (2 * s2)) * bessel_i0e(z)
        elif m.kind is ModelKind.WEIBULL:
            k, lam = m.params
            t = x / lam
            out = k / lam * t ** (k - 1) * np.exp(-(t**k))
        elif m.kind is ModelKind.LOGNORMAL:
            mu, s = m.params
            out = np.exp(-((np.log(x) - mu) ** 2) / (2 * s * s)) / (x * s * math.sqrt(2 * math.pi))
        else:
            out = np.exp(_g0_logpdf(m.params, x))
    return float(out) if scalar else out


def _g0_logpdf(params, x):
    alpha, gam, n = params
    logc = (
        math.log(2.0)
        + n * math.log(n)
        + log_gamma(n - alpha)
        - alpha * math.log(gam)
        - log_gamma(n)
        - log_gamma(-alpha)
    )
    return logc + (2 * n - 1) * np.log(x) - (n - alpha) * np.log(gam + n * x * x)


def _positive(data, name):
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise DataError("data is empty")
    if not np.all(np.isfinite(x)):
        raise DataError("data contains non-finite values")
    if np.any(x <= 0):
        raise DataError(f"{name} fitting requires strictly positive data")
    return x


def fit_lognormal(data) -> BaselineModel:
    lx = np.log(_positive(data, "lognormal"))
    mu = math.fsum(lx.tolist()) / lx.size
    s = float(np.sqrt(np.mean((lx - mu) ** 2)))
    degenerate = not s > 0.0
    return BaselineModel(
        ModelKind.LOGNORMAL,
        (mu, s),
        degenerate=degenerate,
        info={"error": "zero variance of log data"} if degenerate else {},
    )


def fit_weibull(data, tol: float = 1e-10, max_iter: int = 100) -> BaselineModel:
    x = _positive(data, "weibull")
    # work with x / max(x) so x**k cannot overflow; scale is restored below
    top = float(x.max())
    lx = np.log(x / top)
    mean_lx = float(lx.mean())
    sd = float(lx.std())
    if sd == 0.0:
        raise DataError("weibull fit needs non-constant data")
    k = 1.2825 / sd  # pi / sqrt(6) / sd, the Gumbel moment guess
    for it in range(max_iter):
        w = np.exp(k * lx)
        s0 = w.sum()
        s1 = (w * lx).sum()
        s2 = (w * lx * lx).sum()
        g = s1 / s0 - 1.0 / k - mean_lx
        dg = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k)
        step = g / dg
        k_new = k - step
        if k_new <= 0:
            k_new = 0.5 * k
        if abs(k_new - k) <= tol * k:
            k = k_new
            break
        k = k_new
    else:
        raise ConvergenceError(f"weibull shape did not converge in {max_iter} iterations")
    lam = top * float(np.mean(np.exp(k * lx))) ** (1.0 / k)
    return BaselineModel(ModelKind.WEIBULL, (k, lam), info={"iterations": it + 1})


def _rician_ratio(K):
    # mean^2 / E[x^2] as a function of K = nu^2 / (2 sigma^2)
    lag = (1 + K) * _sp.i0e(K / 2) + K * _sp.i1e(K / 2)
    return math.pi / 4 * lag * lag / (1 + K)


def fit_rician(data) -> BaselineModel:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)) or np.any(x < 0):
        raise DataError("rician fitting needs non-empty finite data >= 0")
    m1 = float(np.mean(x))
    m2 = float(np.mean(x * x))
    if m2 <= 0:
        raise DataError("rician fit needs non-zero data")
    ratio = m1 * m1 / m2
    if ratio <= math.pi / 4:
        # below the Rayleigh boundary: no coherent component
        return BaselineModel(ModelKind.RICIAN, (0.0, math.sqrt(m2 / 2)), info={"rayleigh_fallback": True})
    hi = 1.0
    while _rician_ratio(hi) < ratio:
        hi *= 4
        if hi > 1e12:
            raise ConvergenceError("rician moment inversion failed to bracket")
    K = optimize.brentq(lambda k: _rician_ratio(k) - ratio, 0.0, hi, xtol=1e-12)
    sigma2 = m2 / (2 * (1 + K))
    return BaselineModel(
        ModelKind.RICIAN, (math.sqrt(2 * K * sigma2), math.sqrt(sigma2)), info={"rayleigh_fallback": False}
    )


def fit_g0(data, looks: float = 1.0) -> BaselineModel:
    x = _positive(data, "g0")
    lx = np.log(x)
    k1 = float(lx.mean())
    k2 = float(lx.var())
    target = 4 * k2 - float(_sp.polygamma(1, looks))
    if not target > 0:
        raise ConvergenceError("log-cumulants too small for G0: data more homogeneous than the speckle")
    # trigamma is decreasing; solve trigamma(-alpha) = target
    lo, hi = 1e-8, 1.0
    while _sp.polygamma(1, hi) > target:
        hi *= 2
        if hi > 1e12:
            raise ConvergenceError("g0 log-cumulant solve failed to bracket")
    neg_alpha = optimize.brentq(lambda v: float(_sp.polygamma(1, v)) - target, lo, hi, xtol=1e-14, rtol=1e-14)
    gam = looks * math.exp(2 * k1 - _sp.digamma(looks) + _sp.digamma(neg_alpha))
    return BaselineModel(ModelKind.G0, (-neg_alpha, gam, looks))


def fit_baseline(kind, data, *, looks: float = 1.0) -> BaselineModel:
    kind = ModelKind(kind)
    if kind is ModelKind.LOGNORMAL:
        return fit_lognormal(data)
    if kind is ModelKind.WEIBULL:
        return fit_weibull(data)
    if kind is ModelKind.RICIAN:
        return fit_rician(data)
    return fit_g0(data, looks=looks)
