"""Estimator-style wrappers around the density constructions.

Both estimators follow the usual ``fit`` / ``score_samples`` protocol so they
can be cloned, grid-searched over ``bins`` and compared side by side.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_is_fitted

from .circle import wrap
from .families import MapFamily
from .measures import DEFAULT_BINS, EmpiricalMeasure, histogram_measure, w1_to_dirac
from .orbits import NoiseKernel
from .ulam import averaged_ulam, build_ulam, invariant_density


class _CircleDensity(DensityMixin, BaseEstimator):

    def _set_measure(self, mu: EmpiricalMeasure):
        self.measure_ = mu
        self.density_ = mu.density
        self.w1_to_zero_ = w1_to_dirac(mu, 0.0)
        return self

    def score_samples(self, X):
        """Log of the piecewise constant density at each point of ``X``."""
        check_is_fitted(self, "measure_")
        x = wrap(np.asarray(X, dtype=float).ravel())
        idx = np.minimum((x * self.measure_.bins).astype(np.int64), self.measure_.bins - 1)
        with np.errstate(divide="ignore"):
            return np.log(self.density_[idx])

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))


class HistogramDensity(_CircleDensity):
    """Binned empirical measure of circle-valued samples.

    Parameters
    ----------
    bins : int
        Number of equal bins on [0, 1).
    """

    def __init__(self, bins: int = DEFAULT_BINS):
        self.bins = bins

    def fit(self, X, y=None):
        return self._set_measure(histogram_measure(np.asarray(X, dtype=float).ravel(), self.bins))


class UlamDensity(_CircleDensity):
    """Stationary density of the Ulam discretisation of ``f_t`` or of its noisy average.

    ``fit`` ignores its data argument; the measure is determined by the
    dynamics alone.  ``eps > 0`` selects the noise-averaged operator.
    """

    def __init__(self, family: str = "canonical", param=None, t: float = 0.05, eps: float = 0.0,
                 bins: int = DEFAULT_BINS, quad_m: int = 16, tol: float = 1e-12,
                 max_iter: int = 100_000):
        self.family = family
        self.param = param
        self.t = t
        self.eps = eps
        self.bins = bins
        self.quad_m = quad_m
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        fam = MapFamily(self.family, self.param)
        if self.eps > 0:
            P = averaged_ulam(fam, NoiseKernel(self.eps, fam.t0), self.bins, self.quad_m)
        else:
            P = build_ulam(fam, self.t, self.bins)
        mu, info = invariant_density(P, self.tol, self.max_iter, return_info=True)
        self.n_iter_ = info["iterations"]
        self.residual_ = info["residual"]
        return self._set_measure(mu)
