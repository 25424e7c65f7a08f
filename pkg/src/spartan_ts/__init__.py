"""Spartan random processes for gappy, regularly sampled time series."""
from .errors import (
    ConditioningError,
    ConvergenceError,
    InsufficientDataError,
    NotPositiveDefiniteError,
    PermissibilityError,
    SeriesFormatError,
    SpartanError,
)
from .inference import GappySeries, detrend, dm_objective, fit_mle, fit_mmom, nll, sample_moments
from .model import (
    BandedPrecision,
    CovarianceSpec,
    SpartanParams,
    build_precision,
    covariance,
    spartan_covariance,
    spartan_spectral_density,
)
from .predict import FilledSeries, kwp_fill, kwp_predict, sp_fill
from .synth import SimConfig, simulate_series, thin

__all__ = [
    "BandedPrecision",
    "ConditioningError",
    "ConvergenceError",
    "CovarianceSpec",
    "FilledSeries",
    "GappySeries",
    "InsufficientDataError",
    "NotPositiveDefiniteError",
    "PermissibilityError",
    "SeriesFormatError",
    "SimConfig",
    "SpartanError",
    "SpartanParams",
    "build_precision",
    "covariance",
    "detrend",
    "dm_objective",
    "fit_mle",
    "fit_mmom",
    "kwp_fill",
    "kwp_predict",
    "nll",
    "sample_moments",
    "simulate_series",
    "sp_fill",
    "spartan_covariance",
    "spartan_spectral_density",
    "thin",
]
