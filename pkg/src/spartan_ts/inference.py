"""Parameter inference for gappy series.

Two estimators share the Nelder-Mead search in :mod:`spartan_ts.optimize`:

* the modified method of moments (MMoM) matches the sample ratios
  ``S1/S0`` and ``S2/S1`` of squared values, first differences and second
  differences to their model expectations;
* maximum likelihood minimizes the negative log-likelihood profiled over
  ``eta0``, with the log-determinant of the pentadiagonal precision matrix
  taken from an exact banded factorization.

Both search over ``(log(eta1 + 2), log(xi))`` so every trial point is
permissible.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .banded import log_det_banded
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    InsufficientDataError,
    PermissibilityError,
)
from .model import SpartanParams, _spartan_shape, build_precision, check_permissible
from .optimize import ObjectiveError, nelder_mead

__all__ = [
    "GappySeries",
    "MomentSummary",
    "FitResult",
    "detrend",
    "sample_moments",
    "expected_moments",
    "dm_objective",
    "fit_mmom",
    "nll",
    "fit_mle",
    "log_det_banded",
    "MLE_STARTS",
]

TOL = 1e-6
MAX_ITER = 2000
MLE_STARTS = (-1.7, -1.0, 5.0, 50.0)
_MMOM_START = -1.0
_SIMPLEX_STEP = 0.25


@dataclass(frozen=True, eq=False)
class GappySeries:
    """Regularly sampled series with a presence mask.

    Missing entries of ``values`` are stored as NaN.  ``mean_offset`` is the
    constant that was subtracted from the raw data (see :func:`detrend`).
    """

    values: np.ndarray
    present: np.ndarray
    alpha: float = 1.0
    mean_offset: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        present = np.array(self.present, dtype=bool)
        if values.ndim != 1 or values.shape != present.shape:
            raise ValueError("values and present must be 1-d arrays of equal length")
        if not self.alpha > 0:
            raise ValueError(f"sampling step must be positive (got {self.alpha})")
        if not np.all(np.isfinite(values[present])):
            raise ValueError("present values must be finite")
        if present.sum() < 3:
            raise InsufficientDataError(
                f"a series needs at least 3 present points (got {int(present.sum())})"
            )
        values[~present] = np.nan
        values.setflags(write=False)
        present.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "present", present)

    @classmethod
    def from_values(cls, values, alpha: float = 1.0, mean_offset: float = 0.0):
        """Build a series, treating non-finite entries as missing."""
        v = np.asarray(values, dtype=float)
        return cls(v, np.isfinite(v), alpha, mean_offset)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def n_present(self) -> int:
        return int(self.present.sum())

    @property
    def complete(self) -> bool:
        return bool(self.present.all())

    @property
    def missing_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.present)

    @property
    def present_indices(self) -> np.ndarray:
        return np.flatnonzero(self.present)

    def restored(self) -> np.ndarray:
        """Values with ``mean_offset`` added back (NaN at gaps)."""
        return self.values + self.mean_offset

    def scaled(self, c: float) -> "GappySeries":
        return replace(self, values=self.values * c, mean_offset=self.mean_offset * c)


def detrend(x: GappySeries) -> GappySeries:
    """Subtract the mean of the present values and record it in ``mean_offset``."""
    m = float(np.mean(x.values[x.present]))
    return replace(x, values=x.values - m, mean_offset=x.mean_offset + m)


@dataclass(frozen=True)
class MomentSummary:
    """Sample averages of ``S0 = x^2``, ``S1 = (dx/alpha)^2``, ``S2 = (d2x/alpha^2)^2``.

    An average whose count is zero is NaN.
    """

    s0: float
    s1: float
    s2: float
    n0: int
    n1: int
    n2: int
    alpha: float = 1.0

    def check(self):
        if self.n1 == 0 or self.n2 == 0:
            raise DegenerateInputError(
                f"moments undefined: {self.n1} adjacent pairs, {self.n2} triples"
            )
        if not (self.s0 > 0 and self.s1 > 0 and self.s2 > 0):
            raise DegenerateInputError(
                f"moments must be positive (s0={self.s0}, s1={self.s1}, s2={self.s2})"
            )

    def scaled(self, c: float) -> "MomentSummary":
        return replace(self, s0=self.s0 * c * c, s1=self.s1 * c * c, s2=self.s2 * c * c)


def sample_moments(x: GappySeries) -> MomentSummary:
    v, ok, a = x.values, x.present, x.alpha
    n0 = int(ok.sum())
    s0 = float(np.mean(v[ok] ** 2))

    pair = ok[:-1] & ok[1:]
    n1 = int(pair.sum())
    d1 = (v[1:] - v[:-1])[pair] / a
    s1 = float(np.mean(d1**2)) if n1 else math.nan

    triple = ok[:-2] & ok[1:-1] & ok[2:]
    n2 = int(triple.sum())
    d2 = (v[2:] + v[:-2] - 2.0 * v[1:-1])[triple] / a**2
    s2 = float(np.mean(d2**2)) if n2 else math.nan
    return MomentSummary(s0, s1, s2, n0, n1, n2, a)


def expected_moments(eta1: float, xi: float, alpha: float = 1.0):
    """Model expectations ``(E[S0], E[S1], E[S2])`` at ``eta0 = 1``."""
    check_permissible(1.0, eta1, xi, alpha)
    h = np.array([0.0, alpha, 2.0 * alpha]) / xi
    g0, g1, g2 = _spartan_shape(h, eta1)
    e0 = g0
    e1 = 2.0 / alpha**2 * (g0 - g1)
    e2 = 2.0 / alpha**4 * (3.0 * g0 + g2 - 4.0 * g1)
    return float(e0), float(e1), float(e2)


def dm_objective(eta1: float, xi: float, m: MomentSummary) -> float:
    """Distance metric between sample and model moment ratios.

    Depends on the data only through ``m`` and is therefore insensitive to
    the overall scale of the series.  Returns ``inf`` when round-off makes a
    model difference moment non-positive (very large ``xi / alpha``).
    """
    m.check()
    e0, e1, e2 = expected_moments(eta1, xi, m.alpha)
    if not (e1 > 0 and e2 > 0):
        return math.inf
    r1 = (m.s1 / m.s0) * (e0 / e1)
    r2 = (m.s2 / m.s1) * (e1 / e2)
    return (1.0 - math.sqrt(r1)) ** 2 + (1.0 - math.sqrt(r2)) ** 2


@dataclass(frozen=True)
class FitResult:
    params: SpartanParams
    objective: float
    iterations: int
    elapsed: float
    method: str
    details: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            **self.params.as_dict(),
            "iterations": self.iterations,
            "elapsed": self.elapsed,
            "objective": self.objective,
        }


def _to_natural(z):
    return math.exp(z[0]) - 2.0, math.exp(z[1])


def _to_search(eta1, xi):
    return np.array([math.log(eta1 + 2.0), math.log(xi)])


def _guarded(fn):
    """Map impermissible points and degenerate energies to ``inf``."""

    def wrapped(z):
        try:
            eta1, xi = _to_natural(z)
        except OverflowError:
            return math.inf
        if not (eta1 > -2.0 and 0.0 < xi < math.inf and math.isfinite(eta1)):
            return math.inf
        try:
            return fn(eta1, xi)
        except (PermissibilityError, DegenerateInputError, OverflowError):
            return math.inf

    return wrapped


def fit_mmom(x: GappySeries, tol: float = TOL, max_iter: int = MAX_ITER) -> FitResult:
    """Fit ``(eta1, xi)`` by minimizing the distance metric, then recover ``eta0``.

    The search starts from ``eta1 = -1``, ``xi = alpha``. ``eta0`` follows
    from matching the sample mean square to the model variance.
    """
    t0 = time.perf_counter()
    m = sample_moments(x)
    m.check()
    f = _guarded(lambda eta1, xi: dm_objective(eta1, xi, m))
    try:
        res = nelder_mead(f, _to_search(_MMOM_START, x.alpha), tol, max_iter, _SIMPLEX_STEP)
    except ConvergenceError as exc:
        eta1, xi = _to_natural(exc.x)
        raise ConvergenceError(
            str(exc), x=_mmom_params(m, eta1, xi), fun=exc.fun, iterations=exc.iterations
        ) from exc
    eta1, xi = _to_natural(res.x)
    return FitResult(
        _mmom_params(m, eta1, xi),
        res.fun,
        res.iterations,
        time.perf_counter() - t0,
        "mmom",
        {"evaluations": res.evaluations},
    )


def _mmom_params(m: MomentSummary, eta1, xi) -> SpartanParams:
    e0, _, _ = expected_moments(eta1, xi, m.alpha)
    return SpartanParams(m.s0 / e0, eta1, xi, m.alpha)


def scaled_energy(
    eta1: float,
    xi: float,
    x: GappySeries,
    complete: Optional[bool] = None,
    boundary: str = "stationary",
):
    """Energy times ``eta0`` and the number of points it covers.

    Complete series use the exact quadratic form; gappy series use the
    moment-average estimate with N equal to the number of present points.
    """
    if complete is None:
        complete = x.complete
    if complete:
        if not x.complete:
            raise ValueError("series has gaps; pass complete=False")
        jp = build_precision(SpartanParams(1.0, eta1, xi, x.alpha), x.n, True, boundary)
        return 0.5 * float(x.values @ jp.matvec(x.values)), x.n
    m = sample_moments(x)
    m.check()
    n = m.n0
    return n / (2.0 * xi) * (m.s0 + eta1 * xi**2 * m.s1 + xi**4 * m.s2), n


def nll(
    eta1: float,
    xi: float,
    x: GappySeries,
    complete: Optional[bool] = None,
    boundary: str = "stationary",
) -> float:
    """Negative log-likelihood profiled over ``eta0``, constant term dropped.

    Gappy series pair the moment-average energy over the ``N`` present
    points with ``N / n`` times the log-determinant of the full-grid matrix.

    ``boundary`` selects the precision matrix (see
    :func:`spartan_ts.model.build_precision`). With ``"free"`` the
    likelihood only exists where that matrix is positive definite, and
    :class:`NotPositiveDefiniteError` is raised elsewhere.
    """
    check_permissible(1.0, eta1, xi, x.alpha)
    h, n = scaled_energy(eta1, xi, x, complete, boundary)
    if not h > 0:
        raise DegenerateInputError(f"scaled energy must be positive (got {h})")
    jp = build_precision(SpartanParams(1.0, eta1, xi, x.alpha), x.n, True, boundary)
    # per-point log-determinant times the points the energy covers; without the
    # rescaling a gappy likelihood is unbounded below as xi grows
    return 0.5 * n * math.log(2.0 * h / n) - 0.5 * log_det_banded(jp) * n / x.n


def profiled_eta0(eta1, xi, x: GappySeries, complete=None, boundary="stationary"):
    h, n = scaled_energy(eta1, xi, x, complete, boundary)
    return 2.0 * h / n


def fit_mle(
    x: GappySeries,
    starts=MLE_STARTS,
    tol: float = TOL,
    max_iter: int = MAX_ITER,
    boundary: str = "stationary",
) -> FitResult:
    """Maximum likelihood fit with a multistart Nelder-Mead search.

    Each start ``eta1`` in ``starts`` is paired with ``xi = alpha``; the
    lowest local minimum wins.
    """
    t0 = time.perf_counter()
    complete = x.complete
    f = _guarded(lambda eta1, xi: nll(eta1, xi, x, complete, boundary))
    runs = []
    best_failure = None
    for s in starts:
        try:
            res = nelder_mead(f, _to_search(s, x.alpha), tol, max_iter, _SIMPLEX_STEP)
        except ConvergenceError as exc:
            if best_failure is None or exc.fun < best_failure.fun:
                best_failure = exc
            continue
        except ObjectiveError:
            continue
        if math.isfinite(res.fun):
            runs.append((s, res))
    if not runs:
        if best_failure is not None:
            eta1, xi = _to_natural(best_failure.x)
            raise ConvergenceError(
                "no maximum likelihood start converged",
                x=SpartanParams(profiled_eta0(eta1, xi, x, complete, boundary), eta1, xi, x.alpha),
                fun=best_failure.fun,
                iterations=best_failure.iterations,
            )
        raise ConvergenceError("no maximum likelihood start produced a finite objective")
    start, res = min(runs, key=lambda r: r[1].fun)
    eta1, xi = _to_natural(res.x)
    params = SpartanParams(profiled_eta0(eta1, xi, x, complete, boundary), eta1, xi, x.alpha)
    return FitResult(
        params,
        res.fun,
        res.iterations,
        time.perf_counter() - t0,
        "mle",
        {
            "start_eta1": start,
            "evaluations": sum(r.evaluations for _, r in runs),
            "local_minima": [(s, r.fun) for s, r in runs],
        },
    )
