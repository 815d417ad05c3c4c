"""Histogram-based goodness of fit: KL(empirical || model)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DataError, DomainError

# Trapezoid sub-intervals per bin when integrating a model density.
SUBPOINTS = 16


@dataclass(frozen=True)
class HistogramSpec:
    bin_count: int = 100
    upper_quantile: float = 0.999
    floor_epsilon: float = 1e-12
    upper: float | None = None  # fixed upper edge; overrides the quantile

    def __post_init__(self):
        if int(self.bin_count) != self.bin_count or self.bin_count < 2:
            raise DomainError("bin_count must be an integer >= 2")
        if not 0.0 < self.upper_quantile <= 1.0:
            raise DomainError("upper_quantile must lie in (0, 1]")
        if not self.floor_epsilon > 0.0:
            raise DomainError("floor_epsilon must be > 0")
        if self.upper is not None and not self.upper > 0.0:
            raise DomainError("upper must be > 0")

    def edges(self, data) -> np.ndarray:
        upper = self.upper
        if upper is None:
            upper = float(np.quantile(data, self.upper_quantile))
        if not upper > 0.0:
            raise DataError("histogram upper edge must be > 0")
        return np.linspace(0.0, upper, int(self.bin_count) + 1)


def empirical_masses(data, spec: HistogramSpec) -> tuple[np.ndarray, np.ndarray]:
    """Bin edges and the normalized histogram over the covered range."""
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise DataError("data is empty")
    if not np.all(np.isfinite(x)):
        raise DataError("data contains non-finite values")
    edges = spec.edges(x)
    counts, _ = np.histogram(x, bins=edges)
    total = counts.sum()
    if total == 0:
        raise DataError("no data inside the histogram range")
    return edges, counts / total


def model_masses(model_pdf: Callable, edges: np.ndarray, subpoints: int = SUBPOINTS) -> np.ndarray:
    """Probability mass of each bin, by the trapezoid rule on ``subpoints`` pieces.

    Where the density is infinite at x = 0 (e.g. a Weibull shape below 1)
    the first sample point is nudged inside the bin.
    """
    lo, hi = edges[:-1], edges[1:]
    t = np.linspace(0.0, 1.0, subpoints + 1)
    pts = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    if pts[0, 0] == 0.0:
        pts[0, 0] = 1e-9 * (hi[0] - lo[0])
    vals = np.asarray(model_pdf(pts.ravel()), dtype=float).reshape(pts.shape)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    h = ((hi - lo) / subpoints)[:, None]
    return (h * 0.5 * (vals[:, 1:] + vals[:, :-1])).sum(axis=1)


def kl_from_masses(p, q, floor_epsilon: float = 1e-12) -> float:
    """KL(p || q) for two mass vectors, each floored and renormalized."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1 or p.size == 0:
        raise DomainError("mass vectors must be 1-d and of equal length")
    if np.any(p < 0) or np.any(q < 0):
        raise DomainError("masses must be non-negative")
    p = np.maximum(p / p.sum(), floor_epsilon)
    q = np.maximum(q / q.sum(), floor_epsilon)
    p /= p.sum()
    q /= q.sum()
    return max(math.fsum((p * np.log(p / q)).tolist()), 0.0)


def kl_divergence(data, model_pdf: Callable, spec: HistogramSpec | None = None) -> float:
    """KL divergence of the data histogram from a model density.

    ``model_pdf`` must accept a numpy array of amplitudes. Its bin masses are
    renormalized over the histogram range; a model that places less than
    1e-6 of its mass there is rejected.
    """
    spec = spec or HistogramSpec()
    edges, p = empirical_masses(data, spec)
    q = model_masses(model_pdf, edges)
    covered = float(q.sum())
    if not covered >= 1e-6:
        raise DomainError(f"model puts only {covered:.3g} of its mass in the histogram range")
    return kl_from_masses(p, q, spec.floor_epsilon)
