"""Spartan parameter space, covariance families and the discrete precision matrix.

The Spartan (fluctuation-gradient-curvature) process is specified by three
coefficients: a scale ``eta0``, a shape ``eta1`` and a characteristic time
``xi``.  On a regular grid with step ``alpha`` its precision matrix is
pentadiagonal,

.. math::

    J = \\frac{1}{\\eta_0 \\xi} \\left[ I + \\eta_1 \\frac{\\xi^2}{\\alpha^2} J_1
        + \\frac{\\xi^4}{\\alpha^4} J_2 \\right],

where ``J1`` and ``J2`` collect squared first and centred second differences.
The covariance and spectral density below are for the infinite band limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    NotPositiveDefiniteError,
    PermissibilityError,
    SizeError,
    UnsupportedParameterError,
)

ETA1_LOWER = -2.0


@dataclass(frozen=True)
class SpartanParams:
    """Spartan coefficients plus the sampling step.

    ``xi`` and ``alpha`` share one time unit.
    """

    eta0: float
    eta1: float
    xi: float
    alpha: float = 1.0

    def __post_init__(self):
        check_permissible(self.eta0, self.eta1, self.xi, self.alpha)

    def replace(self, **changes) -> "SpartanParams":
        values = dict(eta0=self.eta0, eta1=self.eta1, xi=self.xi, alpha=self.alpha)
        values.update(changes)
        return SpartanParams(**values)

    def as_dict(self) -> dict:
        return dict(eta0=self.eta0, eta1=self.eta1, xi=self.xi, alpha=self.alpha)


def check_permissible(eta0, eta1, xi, alpha=1.0):
    vals = (eta0, eta1, xi, alpha)
    if not all(math.isfinite(v) for v in vals):
        raise PermissibilityError(f"non-finite Spartan parameters {vals}")
    if eta0 <= 0 or xi <= 0 or alpha <= 0:
        raise PermissibilityError(
            f"eta0, xi and alpha must be positive (got eta0={eta0}, xi={xi}, alpha={alpha})"
        )
    if eta1 <= ETA1_LOWER:
        raise PermissibilityError(f"eta1 must exceed -2 (got {eta1})")


def is_permissible(eta1, xi) -> bool:
    return math.isfinite(eta1) and math.isfinite(xi) and eta1 > ETA1_LOWER and xi > 0


def _spartan_shape(h, eta1):
    """Covariance for eta0 = 1 as a function of the normalized lag ``h = |tau|/xi``."""
    if abs(eta1) < 2.0:
        b1 = math.sqrt(2.0 - eta1) / 2.0
        b2 = math.sqrt(2.0 + eta1) / 2.0
        # sin(h b1)/b1 written through sinc so that b1 -> 0 stays finite
        sin_term = h * np.sinc(h * b1 / math.pi)
        return np.exp(-h * b2) * (np.cos(h * b1) / (4.0 * b2) + sin_term / 4.0)
    if eta1 == 2.0:
        return (1.0 + h) * np.exp(-h) / 4.0
    delta = math.sqrt(eta1 * eta1 - 4.0)
    w1 = math.sqrt((eta1 + delta) / 2.0)
    # w1 * w2 = 1; avoids cancellation in (eta1 - delta) for large eta1
    w2 = 1.0 / w1
    return (np.exp(-h * w2) / (2.0 * w2) - np.exp(-h * w1) / (2.0 * w1)) / delta


def spartan_covariance(tau, p: SpartanParams):
    """Spartan covariance ``G(tau)`` in the infinite band limit.

    Parameters
    ----------
    tau : float or array_like
        Time lag(s), in the units of ``p.xi``.
    p : SpartanParams

    Returns
    -------
    float or numpy.ndarray
        Covariance at each lag; a float if ``tau`` is scalar.
    """
    t = np.asarray(tau, dtype=float)
    h = np.abs(t) / p.xi
    g = p.eta0 * _spartan_shape(h, p.eta1)
    if g.ndim == 0:
        return float(g)
    return g


def spartan_spectral_density(k, p: SpartanParams):
    """Spectral density ``eta0 xi / (1 + eta1 (k xi)^2 + (k xi)^4)``."""
    u2 = (np.asarray(k, dtype=float) * p.xi) ** 2
    s = p.eta0 * p.xi / (1.0 + p.eta1 * u2 + u2 * u2)
    if s.ndim == 0:
        return float(s)
    return s


# --------------------------------------------------------------------------
# Classical covariance models


_KINDS = ("spartan", "gaussian", "exponential", "spherical", "whittle-matern")


@dataclass(frozen=True)
class CovarianceSpec:
    """A covariance model and its parameters.

    ``sigma`` and ``b`` apply to the gaussian, exponential and spherical
    kinds; ``sigma``, ``kappa`` and ``nu`` to whittle-matern; ``spartan``
    holds the parameters of the spartan kind.
    """

    kind: str
    sigma: float = 1.0
    b: float = 1.0
    kappa: float = 1.0
    nu: float = 0.5
    spartan: Optional[SpartanParams] = field(default=None)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UnsupportedParameterError(f"unknown covariance kind {self.kind!r}")
        if self.kind == "spartan":
            if self.spartan is None:
                raise ValueError("spartan covariance needs SpartanParams")
            return
        # sigma = 0 is allowed: it yields a degenerate (constant) process
        if self.sigma < 0 or self.b <= 0 or self.kappa <= 0 or self.nu <= 0:
            raise ValueError(f"covariance parameters must be positive: {self}")
        if self.kind == "whittle-matern":
            _half_integer_order(self.nu)

    @classmethod
    def gaussian(cls, sigma, b):
        return cls("gaussian", sigma=sigma, b=b)

    @classmethod
    def exponential(cls, sigma, b):
        return cls("exponential", sigma=sigma, b=b)

    @classmethod
    def spherical(cls, sigma, b):
        return cls("spherical", sigma=sigma, b=b)

    @classmethod
    def whittle_matern(cls, sigma, kappa, nu):
        return cls("whittle-matern", sigma=sigma, kappa=kappa, nu=nu)

    @classmethod
    def from_spartan(cls, p: SpartanParams):
        return cls("spartan", spartan=p)

    @property
    def variance(self) -> float:
        if self.kind == "spartan":
            return spartan_covariance(0.0, self.spartan)
        return self.sigma**2

    def to_dict(self) -> dict:
        if self.kind == "spartan":
            return {"kind": "spartan", **self.spartan.as_dict()}
        if self.kind == "whittle-matern":
            return {"kind": self.kind, "sigma": self.sigma, "kappa": self.kappa, "nu": self.nu}
        return {"kind": self.kind, "sigma": self.sigma, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "CovarianceSpec":
        d = dict(d)
        kind = d.pop("kind")
        if kind == "spartan":
            return cls.from_spartan(SpartanParams(**d))
        return cls(kind, **d)


def _half_integer_order(nu) -> int:
    p = nu - 0.5
    if p < 0 or abs(p - round(p)) > 1e-12:
        raise UnsupportedParameterError(
            f"Whittle-Matern smoothness must be a half integer (got nu={nu})"
        )
    return int(round(p))


def _matern_half_integer(x, nu):
    """``2^(1-nu)/Gamma(nu) x^nu K_nu(x)`` for ``nu = p + 1/2``."""
    p = _half_integer_order(nu)
    total = np.zeros_like(x)
    for i in range(p + 1):
        c = (
            math.factorial(p)
            * math.factorial(p + i)
            / (math.factorial(2 * p) * math.factorial(i) * math.factorial(p - i))
        )
        total = total + c * (2.0 * x) ** (p - i)
    return np.exp(-x) * total


def classical_covariance(tau, spec: CovarianceSpec):
    """Evaluate a gaussian, exponential, spherical or Whittle-Matern covariance."""
    t = np.abs(np.asarray(tau, dtype=float))
    s2 = spec.sigma**2
    if spec.kind == "gaussian":
        g = s2 * np.exp(-((t / spec.b) ** 2))
    elif spec.kind == "exponential":
        g = s2 * np.exp(-t / spec.b)
    elif spec.kind == "spherical":
        h = t / spec.b
        g = np.where(h <= 1.0, s2 * (1.0 - 1.5 * h + 0.5 * h**3), 0.0)
    elif spec.kind == "whittle-matern":
        g = s2 * _matern_half_integer(spec.kappa * t, spec.nu)
    else:
        raise UnsupportedParameterError(f"{spec.kind!r} is not a classical covariance")
    if g.ndim == 0:
        return float(g)
    return g


def covariance(tau, spec: CovarianceSpec):
    """Dispatch on ``spec.kind``, including the spartan family."""
    if spec.kind == "spartan":
        return spartan_covariance(tau, spec.spartan)
    return classical_covariance(tau, spec)


# --------------------------------------------------------------------------
# Precision matrix


@dataclass(frozen=True, eq=False)
class BandedPrecision:
    """Symmetric pentadiagonal matrix.

    ``diag`` has length n, ``off1`` the n-1 entries at offsets +-1 and
    ``off2`` the n-2 entries at offsets +-2.
    """

    diag: np.ndarray
    off1: np.ndarray
    off2: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.off1) != max(n - 1, 0) or len(self.off2) != max(n - 2, 0):
            raise SizeError("inconsistent band lengths")
        for a in (self.diag, self.off1, self.off2):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.diag)

    def band(self, k: int) -> np.ndarray:
        k = abs(k)
        return (self.diag, self.off1, self.off2)[k]

    def upper_band(self) -> np.ndarray:
        """LAPACK upper band storage, shape (3, n), as used by ``scipy.linalg.cholesky_banded``."""
        n = self.n
        ab = np.zeros((3, n))
        ab[2] = self.diag
        ab[1, 1:] = self.off1
        ab[0, 2:] = self.off2
        return ab

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        m += np.diag(self.off1, 1) + np.diag(self.off1, -1)
        if self.n > 2:
            m += np.diag(self.off2, 2) + np.diag(self.off2, -2)
        return m

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.off1 * x[1:]
        y[1:] += self.off1 * x[:-1]
        y[:-2] += self.off2 * x[2:]
        y[2:] += self.off2 * x[:-2]
        return y

    def scaled(self, c: float) -> "BandedPrecision":
        return BandedPrecision(c * self.diag, c * self.off1, c * self.off2)

    def __add__(self, other: "BandedPrecision") -> "BandedPrecision":
        return BandedPrecision(
            self.diag + other.diag, self.off1 + other.off1, self.off2 + other.off2
        )


def gradient_bands(n: int) -> BandedPrecision:
    """Bands of J1 = D1^T D1, D1 the (n-1) x n forward difference operator."""
    diag = np.zeros(n)
    diag[:-1] += 1.0
    diag[1:] += 1.0
    return BandedPrecision(diag, -np.ones(n - 1), np.zeros(max(n - 2, 0)))


def curvature_bands(n: int) -> BandedPrecision:
    """Bands of J2 = D2^T D2, D2 the (n-2) x n centred second difference operator."""
    diag = np.zeros(n)
    off1 = np.zeros(n - 1)
    m = n - 2  # number of interior stencils (1, -2, 1)
    diag[:m] += 1.0
    diag[1 : m + 1] += 4.0
    diag[2 : m + 2] += 1.0
    off1[:m] += -2.0
    off1[1 : m + 1] += -2.0
    return BandedPrecision(diag, off1, np.ones(m))


def interior_coefficients(p: SpartanParams, scaled: bool = False):
    """Interior row ``(a0, a1, a2)`` of the precision matrix (offsets 0, 1, 2)."""
    c1 = p.eta1 * (p.xi / p.alpha) ** 2
    c2 = (p.xi / p.alpha) ** 4
    scale = 1.0 / p.xi if scaled else 1.0 / (p.eta0 * p.xi)
    return scale * (1.0 + 2.0 * c1 + 6.0 * c2), scale * (-c1 - 4.0 * c2), scale * c2


def _inside_root(u):
    """Root of ``r^2 - u r + 1 = 0`` inside the unit circle."""
    s = np.sqrt(complex(u * u - 4.0))
    d = u + s if abs(u + s) >= abs(u - s) else u - s
    return 2.0 / d


def ar2_representation(p: SpartanParams, scaled: bool = False):
    """Autoregressive form of the stationary process on the grid.

    The interior symbol ``a0 + 2 a1 cos w + 2 a2 cos 2w`` is positive for every
    permissible parameter set and factors as ``|1 - phi1 e^{iw} - phi2 e^{2iw}|^2
    / s2``.  Returns ``(phi1, phi2, s2)``, with ``s2`` the innovation variance.
    """
    a0, a1, a2 = interior_coefficients(p, scaled)
    # symbol in u = z + 1/z: a2 u^2 + a1 u + (a0 - 2 a2)
    c = a0 - 2.0 * a2
    disc = np.sqrt(complex(a1 * a1 - 4.0 * a2 * c))
    q = -0.5 * (a1 + disc) if abs(a1 + disc) >= abs(a1 - disc) else -0.5 * (a1 - disc)
    u1, u2 = q / a2, c / q
    r1, r2 = _inside_root(u1), _inside_root(u2)
    phi1 = float((r1 + r2).real)
    phi2 = float(-(r1 * r2).real)
    return phi1, phi2, -phi2 / a2


def _stationary_start(phi1, phi2, s2):
    """Variances of x0 and of x1 given x0, and the lag-1 correlation."""
    den = (1.0 + phi2) * ((1.0 - phi2) ** 2 - phi1**2)
    rho1 = phi1 / (1.0 - phi2) if phi2 != 1.0 else math.inf
    v1 = s2 * (1.0 - phi2) / den * (1.0 - rho1 * rho1) if den > 0 else 0.0
    # near-unit-root parameters lose the stationary start to rounding
    if not (den > 0 and s2 > 0 and v1 > 0 and math.isfinite(v1)):
        raise NotPositiveDefiniteError(
            f"stationary start is numerically singular (phi1={phi1}, phi2={phi2}, s2={s2})"
        )
    g0 = s2 * (1.0 - phi2) / den
    return g0, g0 * (1.0 - rho1 * rho1), rho1


def _stationary_bands(p: SpartanParams, n: int, scaled: bool):
    phi1, phi2, s2 = ar2_representation(p, scaled)
    v0, v1, rho1 = _stationary_start(phi1, phi2, s2)
    diag = np.zeros(n)
    off1 = np.zeros(n - 1)
    off2 = np.zeros(n - 2)
    # whitened residuals: x0, x1 - rho1 x0, then x_t - phi1 x_{t-1} - phi2 x_{t-2}
    diag[0] += 1.0 / v0
    diag[0] += rho1 * rho1 / v1
    diag[1] += 1.0 / v1
    off1[0] += -rho1 / v1
    w = 1.0 / s2
    diag[2:] += w
    diag[1:-1] += w * phi1 * phi1
    diag[:-2] += w * phi2 * phi2
    off1[1:] += -w * phi1
    off1[:-1] += w * phi1 * phi2
    off2 += -w * phi2
    return BandedPrecision(diag, off1, off2)


def stationary_log_det(p: SpartanParams, n: int, scaled: bool = False) -> float:
    """Closed-form log-determinant of the ``boundary="stationary"`` precision matrix."""
    phi1, phi2, s2 = ar2_representation(p, scaled)
    v0, v1, _ = _stationary_start(phi1, phi2, s2)
    return -math.log(v0) - math.log(v1) - (n - 2) * math.log(s2)


def build_precision(
    p: SpartanParams, n: int, scaled: bool = False, boundary: str = "free"
) -> BandedPrecision:
    """Pentadiagonal precision matrix of the Spartan process on ``n`` grid points.

    Parameters
    ----------
    p : SpartanParams
    n : int
        Number of grid points, at least 3.
    scaled : bool
        Leave out the overall ``1/eta0`` factor, giving ``eta0 * J``.
    boundary : {"free", "stationary"}
        ``"free"`` sums the difference stencils that fit inside the grid, so
        the first and last rows are truncated.  This matrix is indefinite
        for part of the permissible region (``eta1`` well below zero).
        ``"stationary"`` keeps the same interior rows but corrects the two
        rows at each end so the matrix is the exact precision of ``n``
        consecutive values of the stationary process; it is positive
        definite for every permissible parameter set.
    """
    if n < 3:
        raise SizeError(f"precision matrix needs n >= 3 (got {n})")
    if boundary == "stationary":
        return _stationary_bands(p, n, scaled)
    if boundary != "free":
        raise ValueError(f"unknown boundary treatment {boundary!r}")
    c1 = p.eta1 * (p.xi / p.alpha) ** 2
    c2 = (p.xi / p.alpha) ** 4
    j1 = gradient_bands(n)
    j2 = curvature_bands(n)
    diag = 1.0 + c1 * j1.diag + c2 * j2.diag
    off1 = c1 * j1.off1 + c2 * j2.off1
    off2 = c2 * j2.off2
    scale = 1.0 / p.xi if scaled else 1.0 / (p.eta0 * p.xi)
    return BandedPrecision(scale * diag, scale * off1, scale * off2)


def energy(x, p: SpartanParams) -> float:
    """Quadratic energy ``x^T J x / 2`` of a complete series."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("energy expects a 1-d series")
    if not np.all(np.isfinite(x)):
        raise ValueError(
            "energy needs a complete series; use the moment estimator for gappy data"
        )
    j = build_precision(p, len(x))
    return 0.5 * float(x @ j.matvec(x))
