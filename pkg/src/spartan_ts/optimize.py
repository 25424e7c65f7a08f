"""Derivative-free minimization with the Nelder-Mead simplex."""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, SpartanError


class ObjectiveError(SpartanError, FloatingPointError):
    pass


class SimplexResult(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0,
    tol: float = 1e-6,
    max_iter: int = 2000,
    step=None,
) -> SimplexResult:
    """Minimize ``f`` with the Nelder-Mead simplex method.

    Standard coefficients are used (reflection 1, expansion 2, contraction
    1/2, shrink 1/2).  The search stops once every vertex lies within
    ``tol`` of the best vertex in each coordinate and the spread of the
    objective over the simplex is below ``tol`` as well.

    Parameters
    ----------
    f : callable
        Objective taking a 1-d array. ``inf`` is allowed and treated as a
        very bad value; ``nan`` aborts the search.
    x0 : array_like
        Starting point.
    tol : float
        Tolerance on both the parameters and the objective.
    max_iter : int
        Iteration cap.
    step : float or array_like, optional
        Edge lengths of the initial simplex. Defaults to 5% of each nonzero
        coordinate and 0.00025 for zero coordinates.

    Returns
    -------
    SimplexResult
        Best vertex, its objective value, iterations and function evaluations.

    Raises
    ------
    ConvergenceError
        If ``max_iter`` iterations pass without meeting the tolerance. The
        exception carries the best vertex.
    ObjectiveError
        If ``f`` returns NaN.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    n = len(x0)
    if step is None:
        step = np.where(x0 != 0.0, 0.05 * np.abs(x0), 0.00025)
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))

    nfev = 0

    def call(x):
        nonlocal nfev
        nfev += 1
        v = float(f(x))
        if math.isnan(v):
            raise ObjectiveError(f"objective returned NaN at x={x.tolist()}")
        return v

    sim = np.empty((n + 1, n))
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += step[i]
    fs = np.array([call(v) for v in sim])
    if not math.isfinite(fs[0]):
        raise ObjectiveError(f"objective is not finite at the starting point {x0.tolist()}")

    it = 0
    while True:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if (
            it > 0
            and np.max(np.abs(sim[1:] - sim[0])) <= tol
            and np.max(np.abs(fs[1:] - fs[0])) <= tol
        ):
            return SimplexResult(sim[0].copy(), float(fs[0]), it, nfev)
        if it >= max_iter:
            raise ConvergenceError(
                f"Nelder-Mead did not converge in {max_iter} iterations",
                x=sim[0].copy(),
                fun=float(fs[0]),
                iterations=it,
            )
        it += 1

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + (centroid - worst)
        fr = call(xr)
        if fr < fs[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = call(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            # outside contraction
            xc = centroid + 0.5 * (xr - centroid)
            fc = call(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = call(xc)
            if fc < fs[-1]:
                sim[-1], fs[-1] = xc, fc
                continue
        # shrink towards the best vertex
        for i in range(1, n + 1):
            sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
            fs[i] = call(sim[i])
