"""Gap filling with the Spartan predictor (SP) and the Kolmogorov-Wiener predictor (KWP).

SP maximizes the joint density over all missing points at once: with
``P`` the missing and ``S`` the present grid positions, the predictions
solve ``J[P, P] x_P = -J[P, S] x_S``.  ``J[P, P]`` is pentadiagonal again,
so the solve is a banded factorization.

KWP is simple kriging with the full training set as search neighbourhood.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.linalg import lapack

from .banded import principal_submatrix, solve
from .errors import ConditioningError, InsufficientDataError, NotPositiveDefiniteError
from .inference import GappySeries
from .model import CovarianceSpec, SpartanParams, build_precision, covariance

OBSERVED = "observed"
PREDICTED = "predicted"
MAX_CONDITION = 1e13

CATEGORIES = ((2, 2), (1, 2), (0, 2), (0, 1), (0, 0), (1, 1), (1, 0), (2, 0), (2, 1))


@dataclass(frozen=True)
class PredictionSet:
    indices: np.ndarray
    neighborhoods: tuple


def prediction_set(x: GappySeries) -> PredictionSet:
    """Missing positions and, for each, the present positions within two steps."""
    idx = x.missing_indices
    hoods = []
    for z in idx:
        lo, hi = max(z - 2, 0), min(z + 2, x.n - 1)
        hoods.append(tuple(int(t) for t in range(lo, hi + 1) if t != z and x.present[t]))
    return PredictionSet(idx, tuple(hoods))


@dataclass(frozen=True, eq=False)
class FilledSeries:
    values: np.ndarray
    source: np.ndarray
    params_used: Union[SpartanParams, CovarianceSpec, None]
    alpha: float = 1.0

    @property
    def predicted_indices(self) -> np.ndarray:
        return np.flatnonzero(self.source == PREDICTED)


def _filled(x: GappySeries, idx, pred, params) -> FilledSeries:
    values = x.restored()
    values[idx] = pred + x.mean_offset
    source = np.where(x.present, OBSERVED, PREDICTED)
    return FilledSeries(values, source, params, x.alpha)


def sp_fill(x: GappySeries, p: SpartanParams, boundary: str = "stationary") -> FilledSeries:
    """Fill every gap with the multipoint Spartan predictor.

    ``x`` is expected to be detrended; ``x.mean_offset`` is added back to all
    output values.  The result does not depend on ``p.eta0``.

    Parameters
    ----------
    x : GappySeries
    p : SpartanParams
        Model parameters; ``p.alpha`` is replaced by the series step.
    boundary : {"stationary", "free"}
        Precision matrix end treatment, see :func:`spartan_ts.model.build_precision`.
        The two agree for points at least two steps from either end.
    """
    if x.n_present < 3:
        raise InsufficientDataError("Spartan prediction needs at least 3 observed points")
    idx = x.missing_indices
    if len(idx) == 0:
        return _filled(x, idx, np.empty(0), p)
    q = SpartanParams(1.0, p.eta1, p.xi, x.alpha)
    J = build_precision(q, x.n, scaled=True, boundary=boundary)
    observed = np.where(x.present, x.values, 0.0)
    rhs = -J.matvec(observed)[idx]
    try:
        pred = solve(principal_submatrix(J, idx), rhs)
    except NotPositiveDefiniteError as exc:
        raise NotPositiveDefiniteError(
            f"prediction block of the precision matrix is not positive definite "
            f"(eta1={p.eta1}, xi={p.xi}, boundary={boundary!r})"
        ) from exc
    return _filled(x, idx, pred, p)


def sp_explicit(x: GappySeries, p: SpartanParams, boundary: str = "stationary") -> np.ndarray:
    """Closed-form SP weights for prediction points that do not interact.

    Each prediction is ``-sum_l J(l, z) x_l / J(z, z)`` over the observed
    neighbours ``l`` of ``z``.  Raises ``ValueError`` if two missing points
    lie within two steps of each other.
    """
    idx = x.missing_indices
    if len(idx) > 1 and np.min(np.diff(idx)) <= 2:
        raise ValueError("prediction points interact; use sp_fill")
    q = SpartanParams(1.0, p.eta1, p.xi, x.alpha)
    J = build_precision(q, x.n, scaled=True, boundary=boundary)
    bands = (J.diag, J.off1, J.off2)
    out = np.empty(len(idx))
    for k, z in enumerate(idx):
        acc = 0.0
        for d in (-2, -1, 1, 2):
            t = z + d
            if 0 <= t < x.n and x.present[t]:
                acc += bands[abs(d)][min(z, t)] * x.values[t]
        out[k] = -acc / J.diag[z] + x.mean_offset
    return out


def _cov_block(cov, rows, cols, alpha):
    if isinstance(cov, CovarianceSpec):
        lags = alpha * np.abs(np.subtract.outer(rows, cols))
        return np.asarray(covariance(lags, cov), dtype=float).reshape(len(rows), len(cols))
    return np.asarray(cov, dtype=float)[np.ix_(rows, cols)]


def _factor_checked(g, max_condition):
    try:
        c, lower = cho_factor(g, lower=False, check_finite=True)
    except LinAlgError as exc:
        raise ConditioningError(
            f"data covariance is not numerically positive definite: {exc}", np.inf
        ) from exc
    anorm = np.max(np.sum(np.abs(g), axis=0))
    rcond, info = lapack.dpocon(c, anorm, uplo="U")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or cond > max_condition:
        raise ConditioningError(
            f"data covariance is ill-conditioned (condition estimate {cond:.3g})", cond
        )
    return c, lower


def kwp_predict(
    x: GappySeries,
    cov: Union[CovarianceSpec, np.ndarray],
    positions,
    max_condition: float = MAX_CONDITION,
) -> np.ndarray:
    """Simple-kriging predictions at arbitrary grid positions.

    ``cov`` is either a covariance model or an explicit covariance matrix
    over the whole grid.  Positions that coincide with observed points
    reproduce the data.  One Cholesky factor of the data covariance serves
    all positions.
    """
    s = x.present_indices
    positions = np.asarray(positions, dtype=int)
    g_ss = _cov_block(cov, s, s, x.alpha)
    factor = _factor_checked(g_ss, max_condition)
    w = cho_solve(factor, x.values[s])
    g_ps = _cov_block(cov, positions, s, x.alpha)
    return g_ps @ w + x.mean_offset


def kwp_fill(
    x: GappySeries,
    cov: Union[CovarianceSpec, np.ndarray],
    window: Optional[int] = None,
    max_condition: float = MAX_CONDITION,
) -> FilledSeries:
    """Fill every gap by Kolmogorov-Wiener prediction.

    With ``window`` set, each point only uses observed data within
    ``window`` grid steps (a local search neighbourhood); by default all
    observed data are used.
    """
    idx = x.missing_indices
    if len(idx) == 0:
        return _filled(x, idx, np.empty(0), cov)
    if window is None:
        pred = kwp_predict(x, cov, idx, max_condition) - x.mean_offset
        return _filled(x, idx, pred, cov)
    s_all = x.present_indices
    pred = np.empty(len(idx))
    for k, z in enumerate(idx):
        s = s_all[np.abs(s_all - z) <= window]
        if len(s) == 0:
            pred[k] = 0.0
            continue
        factor = _factor_checked(_cov_block(cov, s, s, x.alpha), max_condition)
        g_ps = _cov_block(cov, np.array([z]), s, x.alpha)
        pred[k] = (g_ps @ cho_solve(factor, x.values[s]))[0]
    return _filled(x, idx, pred, cov)


def classify_category(z: int, sampled) -> tuple:
    """Neighbour category ``(i, j)`` of grid position ``z``.

    ``i`` counts observed points at offsets +-1, ``j`` at offsets +-2;
    offsets that fall off the grid count as absent.
    """
    sampled = np.asarray(sampled, dtype=bool)
    n = len(sampled)

    def count(d):
        return sum(1 for t in (z - d, z + d) if 0 <= t < n and sampled[t])

    return count(1), count(2)
