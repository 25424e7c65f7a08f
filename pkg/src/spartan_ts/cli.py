"""Command-line interface.

Exit codes: 0 success, 2 input error (bad arguments, unparseable files,
invalid plans), 3 numerical failure (non-convergence, insufficient data,
ill-conditioning).  Relative output paths are resolved against
``$SPARTAN_TS_OUTPUT_DIR`` when it is set.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bench
from .errors import ConvergenceError, SeriesFormatError, SpartanError
from .inference import FitResult, GappySeries, detrend, fit_mle, fit_mmom
from .io import fmt, read_series_file, series_lines, write_text
from .model import CovarianceSpec, SpartanParams, spartan_covariance
from .predict import kwp_fill, sp_fill
from .synth import SimConfig, simulate_series

OUTPUT_DIR_ENV = "SPARTAN_TS_OUTPUT_DIR"

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    pass


def _out_path(path):
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        write_text(_out_path(output), text)


def _load(path, detrended=True) -> tuple:
    sf = read_series_file(path)
    x = sf.to_series()
    return sf, (detrend(x) if detrended else x)


def _fit(x: GappySeries, method: str) -> FitResult:
    return fit_mmom(x) if method == "mmom" else fit_mle(x)


def _report_lines(fit: FitResult, x: GappySeries) -> str:
    p = fit.params
    rows = [
        ("method", fit.method),
        ("eta0", fmt(p.eta0)),
        ("eta1", fmt(p.eta1)),
        ("xi", fmt(p.xi)),
        ("alpha", fmt(p.alpha)),
        ("iterations", str(fit.iterations)),
        ("elapsed", f"{fit.elapsed:.6f}"),
        ("objective", fmt(fit.objective)),
        ("n", str(x.n)),
        ("n_present", str(x.n_present)),
        ("mean_offset", fmt(x.mean_offset)),
    ]
    return "".join(f"{k}: {v}\n" for k, v in rows)


def cmd_infer(args) -> int:
    _, x = _load(args.input, not args.no_detrend)
    try:
        fit = _fit(x, args.method)
    except ConvergenceError as exc:
        best = exc.x.as_dict() if isinstance(exc.x, SpartanParams) else exc.x
        sys.stderr.write(f"error: {exc}; best point {best}, objective {exc.fun}\n")
        return EXIT_NUMERIC
    _emit(_report_lines(fit, x), args.output)
    return EXIT_OK


def _spartan_from_args(args, alpha):
    vals = (args.eta0, args.eta1, args.xi)
    if all(v is None for v in vals):
        return None
    if any(v is None for v in vals):
        raise InputError("--eta0, --eta1 and --xi must be given together")
    try:
        return SpartanParams(args.eta0, args.eta1, args.xi, alpha)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_fill(args) -> int:
    sf, x = _load(args.input, not args.no_detrend)
    params = _spartan_from_args(args, x.alpha)
    if args.predictor == "kwp" and args.cov_kind not in (None, "spartan"):
        cov = _classical_from_args(args)
        filled = kwp_fill(x, cov)
    else:
        if params is None:
            params = _fit(x, args.method).params
        if args.predictor == "sp":
            filled = sp_fill(x, params)
        else:
            filled = kwp_fill(x, CovarianceSpec.from_spartan(params))
    # observed rows keep their original text
    tokens = [tok if ok else None for tok, ok in zip(sf.value_tokens, x.present)]
    text = series_lines(
        sf.times, filled.values, filled.source, time_tokens=sf.time_tokens, value_tokens=tokens
    )
    _emit(text, args.output)
    return EXIT_OK


def _classical_from_args(args) -> CovarianceSpec:
    kind = args.cov_kind
    try:
        if kind == "whittle-matern":
            return CovarianceSpec.whittle_matern(args.sigma, args.kappa, args.nu)
        return CovarianceSpec(kind, sigma=args.sigma, b=args.b)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_simulate(args) -> int:
    if args.model == "spartan":
        p = _spartan_from_args(args, args.alpha)
        if p is None:
            raise InputError("spartan model needs --eta0, --eta1 and --xi")
        spec = CovarianceSpec.from_spartan(p)
    else:
        args.cov_kind = args.model
        spec = _classical_from_args(args)
    x = simulate_series(SimConfig(spec, args.n, args.mean, args.seed, args.alpha))
    times = args.t0 + args.alpha * np.arange(x.n)
    _emit(series_lines(times, x.values), args.output)
    return EXIT_OK


def _load_plan(path) -> bench.BenchPlan:
    try:
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("plan must be a JSON object")
        return bench.BenchPlan.from_dict(raw)
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(f"invalid plan {path}: {exc}") from exc


def cmd_bench(args) -> int:
    plan = _load_plan(args.plan)
    if args.seed is not None:
        plan.seed = args.seed
    if args.replicates is not None:
        plan.replicates = args.replicates
    report = bench.run_benchmark(plan)
    _emit(bench.dumps(report), args.output)
    timings = args.timings
    if timings is None and args.output not in (None, "-"):
        timings = str(args.output) + ".timings.json"
    if timings:
        write_text(_out_path(timings), json.dumps(report.timings, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_acf(args) -> int:
    _, x = _load(args.input, True)
    rho, counts = bench.empirical_acf(x, args.max_lag, return_counts=True)
    cols = ["lag", "empirical", "pairs"]
    model_cols = []
    for m in args.spartan or []:
        p = _fit(x, m).params
        g = spartan_covariance(x.alpha * np.arange(args.max_lag + 1), p)
        model_cols.append(g / g[0])
        cols.append(m)
    lines = [",".join(cols)]
    for k in range(args.max_lag + 1):
        row = [str(k), "NaN" if math.isnan(rho[k]) else fmt(rho[k]), str(counts[k])]
        row += [fmt(c[k]) for c in model_cols]
        lines.append(",".join(row))
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _axis(spec: str) -> np.ndarray:
    try:
        lo, hi, num = spec.split(":")
        return np.linspace(float(lo), float(hi), int(num))
    except ValueError as exc:
        raise InputError(f"axis must look like min:max:count (got {spec!r})") from exc


def cmd_surface(args) -> int:
    _, x = _load(args.input, True)
    grid = bench.surface_grid(x, args.kind, _axis(args.eta1), _axis(args.xi), not args.no_optimum)
    lines = []
    if grid.optimum is not None:
        lines.append(f"# optimum eta1={fmt(grid.optimum[0])} xi={fmt(grid.optimum[1])}")
    lines.append(f"eta1,xi,{args.kind},permissible")
    for i, e in enumerate(grid.eta1):
        for j, s in enumerate(grid.xi):
            v = grid.values[i, j]
            lines.append(
                f"{fmt(e)},{fmt(s)},{'NaN' if math.isnan(v) else fmt(v)},{int(grid.permissible[i, j])}"
            )
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _add_spartan_args(p):
    p.add_argument("--eta0", type=float)
    p.add_argument("--eta1", type=float)
    p.add_argument("--xi", type=float)


def _add_classical_args(p):
    p.add_argument("--sigma", type=float, default=10.0)
    p.add_argument("--b", type=float, default=3.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=3.5)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spartan-ts", description="Spartan random process inference and gap filling"
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="fit Spartan parameters to a series file")
    p.add_argument("input")
    p.add_argument("--method", choices=["mmom", "mle"], default="mmom")
    p.add_argument("--no-detrend", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("fill", help="fill the gaps of a series file")
    p.add_argument("input")
    p.add_argument("--predictor", choices=["sp", "kwp"], default="sp")
    p.add_argument("--method", choices=["mmom", "mle"], default="mmom",
                   help="fit used when no parameters are given")
    _add_spartan_args(p)
    p.add_argument("--cov-kind", choices=["spartan", "gaussian", "exponential", "spherical",
                                          "whittle-matern"],
                   help="covariance for kwp (default: spartan)")
    _add_classical_args(p)
    p.add_argument("--no-detrend", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fill)

    p = sub.add_parser("simulate", help="write a synthetic series")
    p.add_argument("--model", required=True,
                   choices=["gaussian", "exponential", "spherical", "whittle-matern", "spartan"])
    _add_classical_args(p)
    _add_spartan_args(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run a benchmark plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--seed", type=int, help="override the plan's master seed")
    p.add_argument("--replicates", type=int)
    p.add_argument("-o", "--output")
    p.add_argument("--timings", help="where to write wall-clock timings "
                                     "(default: <output>.timings.json)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("acf", help="empirical (and fitted Spartan) correlation function")
    p.add_argument("input")
    p.add_argument("--max-lag", type=int, default=20)
    p.add_argument("--spartan", action="append", choices=["mmom", "mle"],
                   help="add the correlation of a fitted Spartan model (repeatable)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("surface", help="objective surface over (eta1, xi)")
    p.add_argument("input")
    p.add_argument("--kind", choices=["dm", "nll"], default="dm")
    p.add_argument("--eta1", default="-1.95:5:60", help="min:max:count")
    p.add_argument("--xi", default="0.5:5:60", help="min:max:count")
    p.add_argument("--no-optimum", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_surface)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SeriesFormatError, FileNotFoundError, IsADirectoryError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except SpartanError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
