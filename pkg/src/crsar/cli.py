"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure
(non-convergence or an unusable fit).
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .distribution import CrParams, pdf
from .errors import ConvergenceError, CrsarError, DataError, DomainError
from .estimation import choose_a, estimate, estimate_single_moment
from .experiments import (
    GridExperimentConfig,
    MseSurface,
    arange_inclusive,
    benchmark_fit,
    compare_models,
    run_grid_experiment,
    surface_rows,
)
from .gof import HistogramSpec
from .io import (
    InputDataset,
    InputFormat,
    atomic_write,
    fmt,
    load_dataset,
    resolve_output,
    sidecar_path,
    to_csv,
    to_json,
)
from .sampling import GENERATOR_ID, sample_amplitude

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _int_tuple(n):
    def parse(text):
        try:
            vals = tuple(int(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated integers") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated integers")
        return vals
    return parse


def _grid(text):
    try:
        start, step, stop = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like start:step:stop") from None
    return arange_inclusive(start, step, stop)


def _add_input(sp):
    sp.add_argument("--input", required=True, type=Path)
    sp.add_argument("--format", default="csv_amplitudes", choices=[f.value for f in InputFormat])
    sp.add_argument("--patch", type=_int_tuple(4), metavar="ROW,COL,HEIGHT,WIDTH")
    sp.add_argument("--shape", type=_int_tuple(2), metavar="ROWS,COLS", help="raw_u16le_raster size")


def _add_a_mode(sp):
    sp.add_argument("--a-mode", default="mean", choices=["mean", "median", "fixed"])
    sp.add_argument("--a", type=float, help="moment constant for --a-mode fixed")


def _add_hist(sp):
    sp.add_argument("--bins", type=int, default=100)
    sp.add_argument("--upper-quantile", type=float, default=0.999)
    sp.add_argument("--floor-epsilon", type=float, default=1e-12)


def _add_output(sp, formats=("json", "csv"), default="json"):
    sp.add_argument("--output", type=Path, help="output file (default: stdout)")
    sp.add_argument("--output-format", default=default, choices=list(formats))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crsar", description="Cauchy-Rician amplitude modelling.")
    parser.add_argument("--version", action="version", version=f"crsar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("fit", help="estimate gamma and delta from amplitudes")
    _add_input(sp)
    _add_a_mode(sp)
    sp.add_argument("--single-moment", action="store_true", help="use the first moment at a and --a2")
    sp.add_argument("--a2", type=float, help="second constant for --single-moment (default 2a)")
    _add_output(sp, formats=("json",))

    sp = sub.add_parser("simulate", help="draw Cauchy-Rician amplitudes")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--phase", type=float, help="fix the location phase (radians)")
    sp.add_argument("--output", type=Path, required=True)
    sp.add_argument("--output-format", default="csv", choices=["csv", "raw_f64le"])

    sp = sub.add_parser("grid", help="synthetic MSE grid experiment")
    sp.add_argument("--gamma-grid", type=_grid, default=arange_inclusive(5, 5, 150), metavar="START:STEP:STOP")
    sp.add_argument("--delta-grid", type=_grid, default=arange_inclusive(5, 5, 200), metavar="START:STEP:STOP")
    sp.add_argument("--n", type=int, default=40_000, help="samples per cell")
    sp.add_argument("--repeats", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--a-mode", default="mean", choices=["mean", "median"])
    sp.add_argument("--workers", type=int, default=1)
    _add_output(sp, default="csv")

    sp = sub.add_parser("compare", help="KL divergence of every model against the data histogram")
    _add_input(sp)
    sp.add_argument("--a-mode", default="mean", choices=["mean", "median"])
    sp.add_argument("--looks", type=float, default=1.0, help="G0 number of looks")
    _add_hist(sp)
    _add_output(sp, default="csv")

    sp = sub.add_parser("bench", help="time a fit on synthetic data")
    sp.add_argument("--n", type=int, default=40_000)
    sp.add_argument("--gamma", type=float, default=50.0)
    sp.add_argument("--delta", type=float, default=100.0)
    sp.add_argument("--repeats", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    _add_output(sp, formats=("json",))

    sp = sub.add_parser("pdf-table", help="(x, pdf) pairs for density overlays")
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--input", type=Path, help="fit gamma/delta from this file instead")
    sp.add_argument("--format", default="csv_amplitudes", choices=[f.value for f in InputFormat])
    sp.add_argument("--patch", type=_int_tuple(4), metavar="ROW,COL,HEIGHT,WIDTH")
    sp.add_argument("--shape", type=_int_tuple(2), metavar="ROWS,COLS")
    sp.add_argument("--x-max", type=float)
    sp.add_argument("--points", type=int, default=512)
    _add_output(sp, default="csv")
    return parser


def run_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items()}
    cfg["crsar_version"] = __version__
    return cfg


def _emit(args, text: str, meta: dict | None = None) -> None:
    if args.output is None:
        sys.stdout.write(text)
        return
    out = resolve_output(args.output)
    atomic_write(out, text)
    if meta is not None:
        atomic_write(sidecar_path(out), to_json(meta))


def _dataset(args) -> np.ndarray:
    return load_dataset(InputDataset(args.input, args.format, args.patch, args.shape))


def _a_value(args, x) -> float:
    if args.a_mode == "fixed":
        if args.a is None or not args.a > 0:
            raise UsageError("--a-mode fixed needs --a > 0")
        return args.a
    if args.a is not None:
        raise UsageError("--a is only valid with --a-mode fixed")
    return choose_a(x, args.a_mode)


def cmd_fit(args) -> None:
    x = _dataset(args)
    a = _a_value(args, x)
    t0 = time.perf_counter_ns()
    if args.single_moment:
        a2 = args.a2 if args.a2 is not None else 2.0 * a
        est = estimate_single_moment(x, a, a2)
        method = "single algebraic moment at two constants"
    else:
        a2 = None
        est = estimate(x, a)
        method = "two algebraic moments"
    elapsed_us = (time.perf_counter_ns() - t0) / 1e3
    report = {
        "gamma_hat": est.gamma_hat,
        "delta_hat": est.delta_hat,
        "a_used": est.a_used,
        "a2_used": a2,
        "n": int(x.size),
        "diagnostics": est.diagnostics,
        "time_us": elapsed_us,
        "method": method,
        "run_config": run_config(args),
    }
    _emit(args, to_json(report))


def cmd_simulate(args) -> None:
    p = CrParams(args.gamma, args.delta)
    batch = sample_amplitude(p, args.n, args.seed, phase=args.phase)
    if args.output_format == "csv":
        body = "amplitude\n" + "".join(fmt(v) + "\n" for v in batch.amplitudes.tolist())
    else:
        body = batch.amplitudes.astype("<f8").tobytes()
    meta = {
        "seed": args.seed,
        "params": {"gamma": p.gamma, "delta": p.delta},
        "count": batch.count,
        "phase": batch.phase,
        "generator": GENERATOR_ID,
        "format": args.output_format,
        "run_config": run_config(args),
    }
    _emit(args, body, meta)


def cmd_grid(args) -> None:
    cfg = GridExperimentConfig(
        gamma_grid=args.gamma_grid,
        delta_grid=args.delta_grid,
        samples_per_cell=args.n,
        repeats=args.repeats,
        master_seed=args.seed,
        a_mode=args.a_mode,
    )
    surface = run_grid_experiment(cfg, workers=args.workers)
    meta = {
        "config": asdict(cfg),
        "seeding": "SeedSequence([seed, gamma_index, delta_index, repeat]) -> PCG64",
        "generator": GENERATOR_ID,
        "run_config": run_config(args),
    }
    rows = surface_rows(surface)
    if args.output_format == "csv":
        _emit(args, to_csv(rows, MseSurface.CSV_FIELDS), meta)
    else:
        _emit(args, to_json({**meta, "cells": rows}))


def cmd_compare(args) -> None:
    x = _dataset(args)
    spec = HistogramSpec(args.bins, args.upper_quantile, args.floor_epsilon)
    rows = compare_models(x, spec, a_mode=args.a_mode, looks=args.looks)
    finite = [r for r in rows if math.isfinite(r["kl"])]
    best = min(finite, key=lambda r: r["kl"])["model"] if finite else None
    meta = {"n": int(x.size), "histogram": asdict(spec), "best_model": best, "run_config": run_config(args)}
    if args.output_format == "csv":
        flat = [
            {
                "model": r["model"],
                "kl": r["kl"],
                "params": ";".join(f"{k}={fmt(v)}" for k, v in r["params"].items()),
                "method": r["method"],
                "error": r["error"] or "",
            }
            for r in rows
        ]
        _emit(args, to_csv(flat, ("model", "kl", "params", "method", "error")), meta)
    else:
        _emit(args, to_json({**meta, "models": rows}))


def cmd_bench(args) -> None:
    report = benchmark_fit(args.n, CrParams(args.gamma, args.delta), args.repeats, args.seed)
    report["target_ms"] = 68.0
    report["run_config"] = run_config(args)
    _emit(args, to_json(report))


def cmd_pdf_table(args) -> None:
    if args.input is not None:
        if args.gamma is not None or args.delta is not None:
            raise UsageError("give either --input or --gamma/--delta, not both")
        x = _dataset(args)
        est = estimate(x, choose_a(x))
        if est.gamma_nonpositive:
            raise ConvergenceError(f"fitted gamma is not positive ({est.gamma_hat!r})")
        p = CrParams(est.gamma_hat, est.delta_hat)
        x_max = args.x_max or float(np.quantile(x, 0.999))
    else:
        if args.gamma is None or args.delta is None:
            raise UsageError("pdf-table needs --gamma and --delta, or --input")
        p = CrParams(args.gamma, args.delta)
        x_max = args.x_max or 10.0 * (p.gamma + p.delta)
    if args.points < 2 or not x_max > 0:
        raise UsageError("--points must be >= 2 and --x-max > 0")
    xs = np.linspace(0.0, x_max, args.points)
    rows = [{"x": float(a), "pdf": float(b)} for a, b in zip(xs, pdf(p, xs))]
    meta = {"params": {"gamma": p.gamma, "delta": p.delta}, "run_config": run_config(args)}
    if args.output_format == "csv":
        _emit(args, to_csv(rows, ("x", "pdf")), meta)
    else:
        _emit(args, to_json({**meta, "table": rows}))


COMMANDS = {
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "grid": cmd_grid,
    "compare": cmd_compare,
    "bench": cmd_bench,
    "pdf-table": cmd_pdf_table,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"crsar: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"crsar: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DomainError as exc:
        print(f"crsar: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, CrsarError) as exc:
        print(f"crsar: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
