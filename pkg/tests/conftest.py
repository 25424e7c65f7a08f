"""Independent oracles shared by the test modules.

None of these call into the package's numerical kernels: covariances come
from numerical Fourier integrals, precision matrices from explicit
difference operators, and conditioning from dense linear algebra.
"""
import math
import warnings

import numpy as np
import pytest
from scipy import integrate, linalg

from spartan_ts.model import SpartanParams


def spectral_oracle(p, k):
    u2 = (k * p.xi) ** 2
    return p.eta0 * p.xi / (1.0 + p.eta1 * u2 + u2 * u2)


def quad_covariance(tau, p):
    """G(tau) = (1/pi) * int_0^inf cos(k tau) S(k) dk by adaptive quadrature."""
    f = lambda k: spectral_oracle(p, k)
    if tau == 0:
        val, _ = integrate.quad(f, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=500)
    else:
        with warnings.catch_warnings():
            # QAWF reports cycle trouble once it is already far below the requested tolerance
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(
                f, 0, np.inf, weight="cos", wvar=abs(tau), epsabs=1e-12, limlst=200
            )
    return val / math.pi


def difference_operators(n):
    d1 = np.zeros((n - 1, n))
    for i in range(n - 1):
        d1[i, i], d1[i, i + 1] = -1.0, 1.0
    d2 = np.zeros((n - 2, n))
    for i in range(n - 2):
        d2[i, i : i + 3] = (1.0, -2.0, 1.0)
    return d1, d2


def dense_free_precision(p, n, scaled=False):
    d1, d2 = difference_operators(n)
    c1 = p.eta1 * (p.xi / p.alpha) ** 2
    c2 = (p.xi / p.alpha) ** 4
    m = np.eye(n) + c1 * d1.T @ d1 + c2 * d2.T @ d2
    return m / (p.xi if scaled else p.eta0 * p.xi)


def grid_autocovariance(p, max_lag, scaled=False):
    """Autocovariance of the stationary grid process whose interior precision row is that of J.

    Integrates 1/symbol over the circle with a periodic trapezoid rule.
    """
    c1 = p.eta1 * (p.xi / p.alpha) ** 2
    c2 = (p.xi / p.alpha) ** 4
    s = 1.0 / (p.xi if scaled else p.eta0 * p.xi)
    a0, a1, a2 = s * (1 + 2 * c1 + 6 * c2), s * (-c1 - 4 * c2), s * c2
    m = 1 << 16
    w = 2 * np.pi * np.arange(m) / m
    sym = a0 + 2 * a1 * np.cos(w) + 2 * a2 * np.cos(2 * w)
    return np.array([np.mean(np.cos(k * w) / sym) for k in range(max_lag + 1)])


def dense_stationary_precision(p, n, scaled=False):
    g = grid_autocovariance(p, n - 1, scaled)
    return np.linalg.inv(linalg.toeplitz(g))


def dense_conditional_mean(precision, values, present):
    """E[x_P | x_S] = Sigma_PS Sigma_SS^-1 x_S, with Sigma the dense inverse."""
    sigma = np.linalg.inv(precision)
    s = np.flatnonzero(present)
    m = np.flatnonzero(~present)
    return sigma[np.ix_(m, s)] @ np.linalg.solve(sigma[np.ix_(s, s)], values[s])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


PERMISSIBLE = [
    SpartanParams(1.0, -1.9, 0.7),
    SpartanParams(2.0, -1.5, 2.0),
    SpartanParams(0.5, 0.0, 1.0),
    SpartanParams(1.0, 1.0, 1.0),
    SpartanParams(3.0, 2.0, 1.3),
    SpartanParams(1.0, 5.0, 0.5),
    SpartanParams(1.0, 40.0, 3.0),
]
