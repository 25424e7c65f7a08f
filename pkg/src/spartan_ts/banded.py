"""Linear algebra on symmetric pentadiagonal matrices.

Factorizations go through LAPACK's banded Cholesky (``pbtrf``) via scipy, so
the cost is linear in the matrix order.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from .errors import NotPositiveDefiniteError
from .model import BandedPrecision


def cholesky(J: BandedPrecision) -> np.ndarray:
    """Upper banded Cholesky factor of ``J`` in LAPACK storage."""
    try:
        return cholesky_banded(J.upper_band(), lower=False, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise NotPositiveDefiniteError(f"banded Cholesky failed: {exc}") from exc


def log_det_banded(J: BandedPrecision) -> float:
    """Log-determinant of a positive-definite pentadiagonal matrix."""
    c = cholesky(J)
    return 2.0 * float(np.sum(np.log(c[-1])))


def solve(J: BandedPrecision, b) -> np.ndarray:
    return cho_solve_banded((cholesky(J), False), np.asarray(b, dtype=float))


def principal_submatrix(J: BandedPrecision, idx) -> BandedPrecision:
    """Restriction of ``J`` to rows/columns ``idx`` (sorted, unique).

    Two indices more than two grid steps apart never interact, and between
    two indices at most two steps apart there is at most one other index, so
    the restriction is again pentadiagonal in the compressed ordering.
    """
    idx = np.asarray(idx, dtype=int)
    m = len(idx)
    bands = (J.diag, J.off1, J.off2)
    diag = J.diag[idx].copy()
    off = []
    for d in (1, 2):
        out = np.zeros(max(m - d, 0))
        if m > d:
            lo = idx[:-d]
            gap = idx[d:] - lo
            for k in (1, 2):
                sel = gap == k
                out[sel] = bands[k][lo[sel]]
        off.append(out)
    return BandedPrecision(diag, off[0], off[1])
