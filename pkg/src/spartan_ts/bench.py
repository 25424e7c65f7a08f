"""Experiment protocols: parameter recovery, interpolation error tables,
thinning sweeps, cost profiles, empirical correlation and objective surfaces.

Reports are plain nested dicts serialized as JSON.  Everything except
wall-clock timings is a deterministic function of the plan, so timings are
kept apart in :attr:`BenchReport.timings`.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateInputError, SpartanError
from .inference import GappySeries, detrend, dm_objective, fit_mle, fit_mmom, nll, sample_moments
from .model import CovarianceSpec, SpartanParams, is_permissible
from .predict import CATEGORIES, classify_category, kwp_fill, sp_fill
from .synth import SimConfig, block_average, simulate_grid_process, simulate_series, thin

PROTOCOLS = ("recovery", "interpolation", "sweep")
METRICS = ("mae", "mre", "mare", "rmse")


# --------------------------------------------------------------------------
# Error statistics


@dataclass(frozen=True)
class CategoryStats:
    """Error metrics over one group of validation points.

    ``mre`` and ``mare`` are fractions (multiply by 100 for percent) and
    use the actual value as denominator; points whose actual value is 0 are
    left out of them and counted in ``count - relative_count``.
    """

    mae: float
    mre: Optional[float]
    mare: Optional[float]
    rmse: float
    count: int
    relative_count: int


@dataclass(frozen=True)
class ErrorReport:
    per_category: dict
    totals: CategoryStats
    r: Optional[float]


def _stats(err, actual) -> CategoryStats:
    n = len(err)
    if n == 0:
        return CategoryStats(math.nan, None, None, math.nan, 0, 0)
    nz = actual != 0
    with np.errstate(over="ignore"):
        rel = err[nz] / actual[nz]
    return CategoryStats(
        mae=float(np.mean(np.abs(err))),
        mre=float(np.mean(rel)) if rel.size else None,
        mare=float(np.mean(np.abs(rel))) if rel.size else None,
        rmse=float(np.sqrt(np.mean(err**2))),
        count=n,
        relative_count=int(nz.sum()),
    )


def pearson(a, b) -> Optional[float]:
    a = np.asarray(a, dtype=float) - np.mean(a)
    b = np.asarray(b, dtype=float) - np.mean(b)
    den = math.sqrt(float(a @ a) * float(b @ b))
    if den == 0:
        return None
    return float(np.clip((a @ b) / den, -1.0, 1.0))


def error_stats(predicted, actual, categories) -> ErrorReport:
    """MAE, MRE, MARE and RMSE per neighbour category and in total, plus Pearson r.

    The error is signed as ``predicted - actual``.
    """
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape or predicted.ndim != 1 or len(actual) < 1:
        raise ValueError("predicted and actual must be 1-d of equal, nonzero length")
    cats = [tuple(c) for c in categories]
    if len(cats) != len(actual):
        raise ValueError("one category per validation point is required")
    err = predicted - actual
    per = {}
    for c in CATEGORIES:
        m = np.array([k == c for k in cats], dtype=bool)
        per[c] = _stats(err[m], actual[m])
    return ErrorReport(per, _stats(err, actual), pearson(predicted, actual))


def categories_for(idx, present) -> list:
    return [classify_category(int(z), present) for z in idx]


def _mean_or_none(vals):
    vals = [v for v in vals if v is not None and not (isinstance(v, float) and math.isnan(v))]
    return float(np.mean(vals)) if vals else None


def aggregate_reports(reports: Sequence[ErrorReport]) -> dict:
    """Average per-partition metrics over partitions; counts are summed."""

    def agg(stats):
        out = {m: _mean_or_none([getattr(s, m) for s in stats if s.count > 0]) for m in METRICS}
        out["count"] = int(sum(s.count for s in stats))
        return out

    return {
        "categories": {
            _cat_key(c): agg([r.per_category[c] for r in reports]) for c in CATEGORIES
        },
        "total": agg([r.totals for r in reports]),
        "r": _mean_or_none([r.r for r in reports]),
    }


def _cat_key(c) -> str:
    return f"({c[0]},{c[1]})"


# --------------------------------------------------------------------------
# Empirical correlation and objective surfaces


def empirical_acf(x: GappySeries, max_lag: int, return_counts: bool = False):
    """Sample correlation at lags ``0..max_lag`` from co-present pairs.

    The mean and variance come from all present points; lag ``k`` averages
    the centred products over pairs ``(t, t + k)`` with both ends present.
    Lags without any such pair are NaN.
    """
    if x.n_present < 2:
        raise DegenerateInputError("need at least 2 present points")
    v, ok = x.values, x.present
    c = v - np.mean(v[ok])
    var = float(np.mean(c[ok] ** 2))
    if var == 0:
        raise DegenerateInputError("series has zero variance")
    rho = np.full(max_lag + 1, np.nan)
    counts = np.zeros(max_lag + 1, dtype=int)
    for k in range(max_lag + 1):
        both = ok[: x.n - k] & ok[k:]
        counts[k] = int(both.sum())
        if counts[k]:
            rho[k] = float(np.mean((c[: x.n - k] * c[k:])[both])) / var
    return (rho, counts) if return_counts else rho


@dataclass
class SurfaceGrid:
    eta1: np.ndarray
    xi: np.ndarray
    values: np.ndarray
    kind: str
    permissible: np.ndarray
    optimum: Optional[tuple] = None

    def argmin(self) -> tuple:
        i, j = np.unravel_index(np.nanargmin(self.values), self.values.shape)
        return float(self.eta1[i]), float(self.xi[j])


def surface_grid(
    x: GappySeries,
    kind: str,
    eta1_axis,
    xi_axis,
    with_optimum: bool = True,
) -> SurfaceGrid:
    """Evaluate the distance metric or NLL over an ``(eta1, xi)`` grid.

    Cells with ``eta1 <= -2`` are flagged non-permissible and hold NaN.
    """
    if kind not in ("dm", "nll"):
        raise ValueError("kind must be 'dm' or 'nll'")
    eta1_axis = np.asarray(eta1_axis, dtype=float)
    xi_axis = np.asarray(xi_axis, dtype=float)
    vals = np.full((len(eta1_axis), len(xi_axis)), np.nan)
    ok = np.zeros(vals.shape, dtype=bool)
    m = sample_moments(x) if kind == "dm" else None
    for i, e in enumerate(eta1_axis):
        for j, s in enumerate(xi_axis):
            if not is_permissible(e, s):
                continue
            ok[i, j] = True
            try:
                vals[i, j] = dm_objective(e, s, m) if kind == "dm" else nll(e, s, x)
            except SpartanError:
                pass
    grid = SurfaceGrid(eta1_axis, xi_axis, vals, kind, ok)
    if with_optimum:
        fit = fit_mmom(x) if kind == "dm" else fit_mle(x)
        grid.optimum = (fit.params.eta1, fit.params.xi)
    return grid


# --------------------------------------------------------------------------
# Plans and reports


@dataclass
class BenchPlan:
    """Experiment description, read from and written to JSON.

    ``model`` is a covariance description such as ``{"kind": "gaussian",
    "sigma": 10, "b": 3}``; alternatively ``input`` names a series file,
    optionally coarse-grained by ``block`` first.
    """

    protocol: str = "interpolation"
    model: Optional[dict] = None
    input: Optional[str] = None
    block: int = 1
    n: int = 1000
    mean: float = 50.0
    alpha: float = 1.0
    replicates: int = 20
    seed: int = 0
    methods: list = field(default_factory=lambda: ["mmom", "mle"])
    fit: str = "mmom"
    predictors: list = field(default_factory=lambda: ["sp", "kwp"])
    p: float = 0.66
    p_values: list = field(default_factory=lambda: [0.66, 0.6, 0.4, 0.2])

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}; expected one of {PROTOCOLS}")
        if (self.model is None) == (self.input is None):
            raise ValueError("a plan needs exactly one of 'model' or 'input'")
        if self.model is not None:
            CovarianceSpec.from_dict(self.model)
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        bad = set(self.methods) - {"mmom", "mle"} | ({self.fit} - {"mmom", "mle"})
        if bad:
            raise ValueError(f"unknown fit method(s) {sorted(bad)}")
        if set(self.predictors) - {"sp", "kwp"}:
            raise ValueError(f"unknown predictor(s) in {self.predictors}")

    @classmethod
    def from_dict(cls, d: dict) -> "BenchPlan":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown plan field(s): {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BenchReport:
    data: dict
    timings: dict = field(default_factory=dict, compare=False)


def dumps(report: BenchReport) -> str:
    """Deterministic JSON text of the report (timings excluded)."""
    return json.dumps(report.data, indent=2, sort_keys=True, allow_nan=True) + "\n"


def loads(text: str) -> BenchReport:
    return BenchReport(json.loads(text))


FITTERS = {"mmom": fit_mmom, "mle": fit_mle}


def _series_for(plan: BenchPlan, seed: int) -> GappySeries:
    if plan.input is not None:
        from .io import read_series

        x = read_series(plan.input)
        return block_average(x, plan.block) if plan.block > 1 else x
    spec = CovarianceSpec.from_dict(plan.model)
    return simulate_series(SimConfig(spec, plan.n, plan.mean, seed, plan.alpha))


def _fit_summary(fits) -> dict:
    keys = ("eta0", "eta1", "xi", "iterations", "objective")
    rows = [
        dict(**f.params.as_dict(), iterations=f.iterations, objective=f.objective) for f in fits
    ]
    if not rows:
        return {"mean": None, "std": None, "count": 0}
    arr = {k: np.array([r[k] for r in rows], dtype=float) for k in keys}
    return {
        "mean": {k: float(arr[k].mean()) for k in keys},
        "std": {k: float(arr[k].std(ddof=1)) if len(rows) > 1 else 0.0 for k in keys},
        "count": len(rows),
    }


def _run_recovery(plan: BenchPlan, timings: dict) -> dict:
    fits = {m: [] for m in plan.methods}
    per = []
    failures = []
    times = {m: [] for m in plan.methods}
    for r in range(plan.replicates):
        x = detrend(_series_for(plan, plan.seed + r))
        row = {"replicate": r}
        for m in plan.methods:
            try:
                f = FITTERS[m](x)
            except SpartanError as exc:
                failures.append({"replicate": r, "method": m, "error": str(exc)})
                continue
            fits[m].append(f)
            times[m].append(f.elapsed)
            row[m] = dict(**f.params.as_dict(), iterations=f.iterations, objective=f.objective)
        per.append(row)
    timings["mean_fit_seconds"] = {m: float(np.mean(t)) if t else None for m, t in times.items()}
    return {
        "fits": {m: _fit_summary(fs) for m, fs in fits.items()},
        "replicates": per,
        "failures": failures,
    }


def _interpolation_round(plan, x, p, timings, tag):
    reports = {k: [] for k in plan.predictors}
    fits = []
    failures = []
    t_fit, t_pred = [], {k: [] for k in plan.predictors}
    for r in range(plan.replicates):
        training, idx, actual = thin(x, p, plan.seed + r + 1)
        training = detrend(training)
        try:
            t0 = time.perf_counter()
            f = FITTERS[plan.fit](training)
            t_fit.append(time.perf_counter() - t0)
        except SpartanError as exc:
            failures.append({"replicate": r, "stage": "fit", "error": str(exc)})
            continue
        fits.append(f)
        cats = categories_for(idx, training.present)
        for k in plan.predictors:
            try:
                t0 = time.perf_counter()
                if k == "sp":
                    filled = sp_fill(training, f.params)
                else:
                    filled = kwp_fill(training, CovarianceSpec.from_spartan(f.params))
                t_pred[k].append(time.perf_counter() - t0)
            except SpartanError as exc:
                failures.append({"replicate": r, "stage": k, "error": str(exc)})
                continue
            reports[k].append(error_stats(filled.values[idx], actual, cats))
    timings[tag] = {
        "mean_fit_seconds": float(np.mean(t_fit)) if t_fit else None,
        "mean_predict_seconds": {k: float(np.mean(v)) if v else None for k, v in t_pred.items()},
    }
    return {
        "p": p,
        "validation_size": int(math.floor(p * x.n + 0.5)),
        "predictors": {k: aggregate_reports(v) if v else None for k, v in reports.items()},
        "fit": _fit_summary(fits),
        "failures": failures,
    }


def run_benchmark(plan: BenchPlan) -> BenchReport:
    """Run a plan end to end.

    * ``recovery``: ``replicates`` independent series, each fitted complete
      by every method in ``methods``.
    * ``interpolation``: one series (seed ``seed``) thinned ``replicates``
      times (seeds ``seed + 1 + r``) at fraction ``p``; fit on each training
      set, fill with each predictor, score the validation set.
    * ``sweep``: the interpolation protocol for every ``p`` in ``p_values``.
    """
    timings: dict = {}
    data = {"plan": plan.to_dict(), "protocol": plan.protocol}
    if plan.protocol == "recovery":
        data.update(_run_recovery(plan, timings))
    else:
        x = _series_for(plan, plan.seed)
        if plan.protocol == "interpolation":
            data.update(_interpolation_round(plan, x, plan.p, timings, "interpolation"))
        else:
            data["sweep"] = [
                _interpolation_round(plan, x, p, timings, f"p={p}") for p in plan.p_values
            ]
    return BenchReport(data, timings)


# --------------------------------------------------------------------------
# Cost profile


def _median_call_time(fn, repeats: int = 200) -> float:
    samples = []
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        samples.append((time.perf_counter() - t0) / repeats)
    return float(np.median(samples))


def _fastest_fit(fitter, x, repeats: int):
    runs = [fitter(x) for _ in range(repeats)]
    return min(runs, key=lambda f: f.elapsed)


def cost_profile(
    sizes=(100, 1000, 10000),
    params: SpartanParams = SpartanParams(1.0, -1.0, 2.0),
    seed: int = 0,
    repeats: int = 3,
) -> list:
    """Time the distance metric per call and whole MMoM/MLE fits over series sizes.

    Series are drawn from the grid process, which is exact and linear in
    the series length.  Fit times are the fastest of ``repeats`` runs.
    """
    rows = []
    for n in sizes:
        x = detrend(simulate_grid_process(params, n, seed))
        m = sample_moments(x)
        dm_t = _median_call_time(lambda: dm_objective(params.eta1, params.xi, m))
        mm = _fastest_fit(fit_mmom, x, repeats)
        ml = _fastest_fit(fit_mle, x, repeats)
        rows.append(
            {
                "n": n,
                "dm_call_seconds": dm_t,
                "mmom_seconds": mm.elapsed,
                "mle_seconds": ml.elapsed,
                "mmom_iterations": mm.iterations,
                "mle_iterations": ml.iterations,
                "ratio": ml.elapsed / mm.elapsed,
            }
        )
    return rows
