"""Synthetic Gaussian series and training/validation partitions.

Random numbers come from numpy's PCG64 bit generator seeded with the given
integer, so replicate statistics are reproducible across platforms.
Replicate ``r`` of a run with master seed ``s`` uses seed ``s + r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from .errors import InsufficientDataError, ModelError
from .inference import GappySeries
from .model import (
    CovarianceSpec,
    SpartanParams,
    _stationary_start,
    ar2_representation,
    covariance,
)

JITTER = 1e-10


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SimConfig:
    spec: CovarianceSpec
    n: int
    mean: float = 0.0
    seed: int = 0
    alpha: float = 1.0

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"series length must be at least 3 (got {self.n})")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def covariance_matrix(spec: CovarianceSpec, n: int, alpha: float = 1.0) -> np.ndarray:
    lags = alpha * np.arange(n)
    g = covariance(lags, spec)
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return g[idx]


def _frozen(a):
    a.setflags(write=False)
    return a


@lru_cache(maxsize=16)
def _factor(spec: CovarianceSpec, n: int, alpha: float) -> np.ndarray:
    c = covariance_matrix(spec, n, alpha)
    try:
        return _frozen(cholesky(c, lower=True))
    except LinAlgError:
        pass
    # near-singular (e.g. gaussian model on a dense grid): jitter once
    c[np.diag_indices(n)] += JITTER * spec.variance
    try:
        return _frozen(cholesky(c, lower=True))
    except LinAlgError as exc:
        raise ModelError(f"covariance matrix of {spec.kind} model is not positive definite") from exc


def simulate_series(c: SimConfig) -> GappySeries:
    """Draw ``mean + L z`` with ``L`` the Cholesky factor of the covariance matrix."""
    if c.spec.kind != "spartan" and c.spec.sigma == 0:
        return GappySeries.from_values(np.full(c.n, float(c.mean)), c.alpha)
    L = _factor(c.spec, c.n, float(c.alpha))
    z = rng_for(c.seed).standard_normal(c.n)
    return GappySeries.from_values(c.mean + L @ z, c.alpha)


def simulate_replicates(c: SimConfig, replicates: int) -> list:
    return [simulate_series(replace(c, seed=c.seed + r)) for r in range(replicates)]


def thin(x: GappySeries, p: float, seed: int):
    """Move a random fraction ``p`` of the points into a validation set.

    Returns
    -------
    training : GappySeries
        The series with validation positions masked out.
    validation_idx : numpy.ndarray
        Sorted grid positions of the validation points.
    validation_values : numpy.ndarray
        The original values at those positions (``mean_offset`` included).
    """
    if not x.complete:
        raise ValueError("thin expects a complete series")
    if not 0.0 < p < 1.0:
        raise ValueError(f"thinning fraction must lie in (0, 1) (got {p})")
    n_val = int(math.floor(p * x.n + 0.5))
    if n_val < 1:
        raise ValueError(f"p={p} leaves no validation points for n={x.n}")
    if x.n - n_val < 3:
        raise InsufficientDataError(f"p={p} leaves fewer than 3 training points")
    idx = np.sort(rng_for(seed).choice(x.n, size=n_val, replace=False))
    present = np.ones(x.n, dtype=bool)
    present[idx] = False
    training = GappySeries(x.values, present, x.alpha, x.mean_offset)
    return training, idx, x.restored()[idx]


def block_average(x: GappySeries, k: int) -> GappySeries:
    """Non-overlapping block means; a trailing partial block is dropped."""
    if k < 1:
        raise ValueError("block size must be at least 1")
    if k > x.n:
        raise ValueError(f"block size {k} exceeds series length {x.n}")
    if not x.complete:
        raise ValueError("block_average expects a complete series")
    m = x.n // k
    v = x.values[: m * k].reshape(m, k).mean(axis=1)
    return GappySeries.from_values(v, x.alpha * k, x.mean_offset)


def simulate_grid_process(p: SpartanParams, n: int, seed: int, mean: float = 0.0) -> GappySeries:
    """Exact O(n) draw of the stationary grid process with precision ``J``.

    Runs the autoregressive form of the pentadiagonal precision matrix
    (see :func:`spartan_ts.model.ar2_representation`) from its stationary
    start.  The covariance of this process is the inverse of
    ``build_precision(p, n, boundary="stationary")``, which approaches the
    continuous covariance only when ``xi >> alpha``.
    """
    if n < 3:
        raise ValueError("series length must be at least 3")
    phi1, phi2, s2 = ar2_representation(p)
    v0, v1, rho1 = _stationary_start(phi1, phi2, s2)
    e = rng_for(seed).standard_normal(n)
    x = np.empty(n)
    x[0] = math.sqrt(v0) * e[0]
    x[1] = rho1 * x[0] + math.sqrt(v1) * e[1]
    sd = math.sqrt(s2)
    for t in range(2, n):
        x[t] = phi1 * x[t - 1] + phi2 * x[t - 2] + sd * e[t]
    return GappySeries.from_values(mean + x, p.alpha)
