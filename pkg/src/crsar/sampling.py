"""Seeded sampling of circular-bivariate Cauchy signals and their amplitudes.

Points are drawn in polar form around the location ``(delta1, delta2)``:
the radius by inverting the radial CDF ``1 - gamma / sqrt(gamma^2 + r^2)``
and the angle uniformly. Both need one uniform each, and nothing is rejected.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence``. Streams are stable for a fixed numpy release;
:data:`GENERATOR_ID` records both and goes into every output's metadata.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import CrParams
from .errors import DomainError

GENERATOR_ID = f"numpy-PCG64/SeedSequence (numpy {np.__version__})"


@dataclass(frozen=True)
class LocationDecomposition:
    """Real/imaginary locations whose norm is the unified ``delta``."""

    delta1: float
    delta2: float

    @classmethod
    def from_phase(cls, delta: float, phase: float) -> "LocationDecomposition":
        return cls(delta * math.cos(phase), delta * math.sin(phase))

    @property
    def norm(self) -> float:
        return math.hypot(self.delta1, self.delta2)

    def check(self, delta: float) -> None:
        if not math.isclose(self.norm, delta, rel_tol=1e-12, abs_tol=1e-300):
            raise DomainError(
                f"decomposition norm {self.norm!r} does not match delta {delta!r}"
            )


@dataclass
class SampleBatch:
    amplitudes: np.ndarray
    seed: int | tuple
    params: CrParams
    count: int
    phase: float = 0.0
    generator: str = field(default=GENERATOR_ID)

    def __post_init__(self):
        if self.amplitudes.shape != (self.count,):
            raise DomainError("amplitude array length does not match count")


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator from an integer seed or a tuple of integers."""
    key = [int(k) for k in seed] if isinstance(seed, (tuple, list)) else [int(seed)]
    if any(k < 0 for k in key):
        raise DomainError("seeds must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def _check_count(n) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"sample count must be a positive integer, got {n}")
    return int(n)


def _radius(u, gamma):
    # gamma * sqrt(1/(1-u)^2 - 1), rearranged to avoid cancellation near u = 0
    return gamma * np.sqrt(u * (2.0 - u)) / (1.0 - u)


def sample_isotropic_cauchy_radius(u, gamma: float):
    """Inverse of the radial CDF of an isotropic bivariate Cauchy vector."""
    if gamma <= 0.0 or not math.isfinite(gamma):
        raise DomainError("gamma must be finite and > 0")
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("u must lie in the open interval (0, 1)")
    out = _radius(arr, gamma)
    return float(out) if np.ndim(u) == 0 else out


def _draw_complex(rng, p: CrParams, loc: LocationDecomposition, n: int) -> np.ndarray:
    u = rng.random(n)
    theta = rng.random(n) * (2.0 * math.pi)
    r = _radius(u, p.gamma)
    out = np.empty((n, 2))
    out[:, 0] = loc.delta1 + r * np.cos(theta)
    out[:, 1] = loc.delta2 + r * np.sin(theta)
    return out


def sample_complex(p: CrParams, loc: LocationDecomposition, n: int, seed) -> np.ndarray:
    """``n`` draws of (re, im) = (delta1, delta2) + gamma * C, as an (n, 2) array."""
    n = _check_count(n)
    loc.check(p.delta)
    return _draw_complex(make_rng(seed), p, loc, n)


def sample_amplitude(p: CrParams, n: int, seed, *, phase: float | None = None) -> SampleBatch:
    """Amplitudes of ``n`` circular Cauchy draws.

    The location phase is drawn once per batch from the same stream unless
    ``phase`` forces it. The amplitude law does not depend on the phase.
    """
    n = _check_count(n)
    rng = make_rng(seed)
    drawn = rng.random() * (2.0 * math.pi)
    phi = drawn if phase is None else float(phase)
    loc = LocationDecomposition.from_phase(p.delta, phi)
    z = _draw_complex(rng, p, loc, n)
    amps = np.hypot(z[:, 0], z[:, 1])
    return SampleBatch(amplitudes=amps, seed=seed, params=p, count=n, phase=phi)
