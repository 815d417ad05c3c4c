"""Synthetic grid experiment, model comparison and fit timing."""
from __future__ import annotations

import math
import os
import platform
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .baselines import FIT_METHODS, ModelKind, fit_baseline
from .distribution import CrParams, pdf
from .errors import CrsarError, DomainError
from .estimation import choose_a, estimate
from .gof import HistogramSpec, kl_divergence
from .sampling import GENERATOR_ID, sample_amplitude


def arange_inclusive(start: float, step: float, stop: float) -> tuple[float, ...]:
    """``start:step:stop`` with the end point included, as in [5:5:150]."""
    if step <= 0:
        raise DomainError("grid step must be > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + i * step for i in range(count))


@dataclass(frozen=True)
class GridExperimentConfig:
    gamma_grid: tuple = arange_inclusive(5, 5, 150)
    delta_grid: tuple = arange_inclusive(5, 5, 200)
    samples_per_cell: int = 40_000
    repeats: int = 1
    master_seed: int = 0
    a_mode: str = "mean"

    def __post_init__(self):
        for name in ("gamma_grid", "delta_grid"):
            grid = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, grid)
            if not grid:
                raise DomainError(f"{name} is empty")
            if grid[0] <= 0 or any(b <= a for a, b in zip(grid, grid[1:])):
                raise DomainError(f"{name} must be positive and strictly increasing")
        if int(self.samples_per_cell) != self.samples_per_cell or self.samples_per_cell < 1:
            raise DomainError("samples_per_cell must be a positive integer")
        if int(self.repeats) != self.repeats or self.repeats < 1:
            raise DomainError("repeats must be a positive integer")
        if self.a_mode not in ("mean", "median"):
            raise DomainError("a_mode must be 'mean' or 'median'")


@dataclass(frozen=True)
class CellResult:
    gamma_true: float
    delta_true: float
    gamma_hat_mean: float
    delta_hat_mean: float
    gamma_mse: float
    delta_mse: float
    clamp_count: int
    gamma_nonpositive_count: int


@dataclass
class MseSurface:
    config: GridExperimentConfig
    cells: list = field(default_factory=list)

    CSV_FIELDS = tuple(CellResult.__dataclass_fields__)


def cell_seed(master_seed: int, row: int, col: int, rep: int) -> tuple[int, int, int, int]:
    """Seed key of one grid cell and repeat.

    The key is hashed by numpy's ``SeedSequence`` into the PCG64 state, so
    cells are independent and each can be regenerated on its own.
    """
    return (int(master_seed), int(row), int(col), int(rep))


def run_cell(cfg: GridExperimentConfig, row: int, col: int) -> CellResult:
    g, d = cfg.gamma_grid[row], cfg.delta_grid[col]
    p = CrParams(g, d)
    gh, dh = [], []
    clamps = nonpos = 0
    for rep in range(cfg.repeats):
        x = sample_amplitude(p, cfg.samples_per_cell, cell_seed(cfg.master_seed, row, col, rep)).amplitudes
        est = estimate(x, choose_a(x, cfg.a_mode))
        gh.append(est.gamma_hat)
        dh.append(est.delta_hat)
        clamps += est.delta_clamped
        nonpos += est.gamma_nonpositive
    return CellResult(
        gamma_true=g,
        delta_true=d,
        gamma_hat_mean=math.fsum(gh) / len(gh),
        delta_hat_mean=math.fsum(dh) / len(dh),
        gamma_mse=math.fsum((v - g) ** 2 for v in gh) / len(gh),
        delta_mse=math.fsum((v - d) ** 2 for v in dh) / len(dh),
        clamp_count=clamps,
        gamma_nonpositive_count=nonpos,
    )


def _run_row(args):
    cfg, row = args
    return [run_cell(cfg, row, col) for col in range(len(cfg.delta_grid))]


def run_grid_experiment(cfg: GridExperimentConfig, workers: int = 1) -> MseSurface:
    """Estimate every (gamma, delta) cell; cells ordered gamma-major.

    Results do not depend on ``workers``: every cell seeds its own stream.
    """
    tasks = [(cfg, row) for row in range(len(cfg.gamma_grid))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_row, tasks))
    else:
        rows = [_run_row(t) for t in tasks]
    return MseSurface(cfg, [c for row in rows for c in row])


def fit_cauchy_rician(x, a_mode: str = "mean"):
    est = estimate(x, choose_a(x, a_mode))
    if est.gamma_nonpositive:
        raise CrsarError(f"fitted gamma is not positive ({est.gamma_hat!r})")
    return est, CrParams(est.gamma_hat, est.delta_hat)


def compare_models(x, spec: HistogramSpec | None = None, *, a_mode: str = "mean", looks: float = 1.0) -> list[dict]:
    """Fit Cauchy-Rician and every baseline to ``x``; one KL row per model.

    A model whose fit fails, or whose mass misses the histogram range, gets
    ``kl = inf`` and the reason in ``error``.
    """
    spec = spec or HistogramSpec()
    rows = []
    try:
        est, p = fit_cauchy_rician(x, a_mode)
        rows.append({
            "model": "cauchy_rician",
            "kl": kl_divergence(x, lambda t: pdf(p, t), spec),
            "params": {"gamma": est.gamma_hat, "delta": est.delta_hat, "a": est.a_used},
            "method": f"algebraic moments, a = sample {a_mode}",
            "error": None,
        })
    except CrsarError as exc:
        rows.append({"model": "cauchy_rician", "kl": math.inf, "params": {}, "method": "algebraic moments", "error": str(exc)})
    for kind in ModelKind:
        row = {"model": kind.value, "kl": math.inf, "params": {}, "method": FIT_METHODS[kind], "error": None}
        try:
            m = fit_baseline(kind, x, looks=looks)
            row["params"] = m.as_dict()
            if m.degenerate:
                raise CrsarError(m.info.get("error", "degenerate fit"))
            row["kl"] = kl_divergence(x, m.pdf, spec)
        except CrsarError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def machine_metadata() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "crsar": __version__,
    }


def benchmark_fit(n: int, p: CrParams, repeats: int = 50, seed: int = 0, a_mode: str = "mean") -> dict:
    """Wall-clock time of one fit (choose a, moments, solve) on ``n`` amplitudes.

    Sample generation is excluded. The process is pinned to a single CPU for
    the measurement where the OS allows it.
    """
    if int(n) != n or n < 1 or repeats < 1:
        raise DomainError("n and repeats must be positive integers")
    x = sample_amplitude(p, int(n), seed).amplitudes
    pinned = False
    old_mask = None
    if hasattr(os, "sched_getaffinity"):
        old_mask = os.sched_getaffinity(0)
        try:
            os.sched_setaffinity(0, {min(old_mask)})
            pinned = True
        except OSError:
            pass
    try:
        estimate(x, choose_a(x, a_mode))  # warm-up
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            estimate(x, choose_a(x, a_mode))
            times.append((time.perf_counter_ns() - t0) / 1e3)
    finally:
        if pinned:
            os.sched_setaffinity(0, old_mask)
    return {
        "n": int(n),
        "repeats": int(repeats),
        "params": {"gamma": p.gamma, "delta": p.delta},
        "seed": seed,
        "a_mode": a_mode,
        "mean_us": statistics.fmean(times),
        "min_us": min(times),
        "median_us": statistics.median(times),
        "single_cpu_pinned": pinned,
        "generator": GENERATOR_ID,
        "machine": machine_metadata(),
    }


def surface_rows(surface: MseSurface) -> list[dict]:
    return [asdict(c) for c in surface.cells]
