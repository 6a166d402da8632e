"""scikit-learn style wrappers around the simulator and the estimators.

All classes follow the sklearn conventions: hyper-parameters are stored
verbatim by ``__init__``, ``fit`` validates and learns, learned attributes
end with an underscore, so ``get_params``/``set_params``/``clone`` work.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_samples
from .exceptions import ConfigurationError
from .model import ModelParams, init_market, run
from .model.params import ExponentialKernel, RationalKernel
from .stats import (
    autocorrelation,
    fit_acf_decay,
    fit_power_law_tail,
    hill_tail_exponent,
    log_binned_pdf,
)
from .stats.powerlaw import DEFAULT_MIN_COUNT, DEFAULT_MIN_DECADES, DEFAULT_MIN_R_SQUARED


class HerdingSimulator(BaseEstimator):
    """Volume-interacting herding market.

    ``fit`` builds the initial market and runs the warmup; ``simulate``
    then advances the fitted state and returns the trade events.

    Parameters
    ----------
    n_agents : int
        Number of agents M.
    kernel : {"rational", "exponential"}
    b : float
        Coupling of the rational kernel.
    c, d : float
        Parameters of the exponential kernel.
    A : float
        Price-impact saturation constant.
    seed : int
    warmup_steps : int
    second_cluster : {"uniform", "size_biased"}
    """

    def __init__(self, n_agents=40000, kernel="rational", b=0.45, c=1.0, d=2.0, A=50.0,
                 seed=0, warmup_steps=100_000, second_cluster="uniform"):
        self.n_agents = n_agents
        self.kernel = kernel
        self.b = b
        self.c = c
        self.d = d
        self.A = A
        self.seed = seed
        self.warmup_steps = warmup_steps
        self.second_cluster = second_cluster

    def model_params(self) -> ModelParams:
        if self.kernel == "rational":
            kern = RationalKernel(self.b)
        elif self.kernel == "exponential":
            kern = ExponentialKernel(self.c, self.d)
        else:
            raise ConfigurationError(f"unknown kernel {self.kernel!r}")
        return ModelParams(M=int(self.n_agents), kernel=kern, A=float(self.A),
                           seed=int(self.seed), second_cluster=self.second_cluster)

    def fit(self, X=None, y=None):
        self.params_ = self.model_params()
        self.state_ = init_market(self.params_)
        run(self.state_, int(self.warmup_steps), record=False)
        return self

    def simulate(self, n_steps):
        check_is_fitted(self, "state_")
        return run(self.state_, n_steps)


class LogBinnedDensity(BaseEstimator):
    """Log-binned histogram density, queried like ``KernelDensity``."""

    def __init__(self, bins_per_decade=20):
        self.bins_per_decade = bins_per_decade

    def fit(self, X, y=None):
        self.histogram_ = log_binned_pdf(X, self.bins_per_decade)
        return self

    def score_samples(self, X):
        """Natural log of the density at ``X`` (``-inf`` outside occupied bins)."""
        check_is_fitted(self, "histogram_")
        X = check_samples(X, positive=True)
        h = self.histogram_
        k = np.searchsorted(h.bin_edges, X, side="right") - 1
        inside = (k >= 0) & (k < h.densities.size)
        dens = np.zeros(X.shape)
        dens[inside] = h.densities[k[inside]]
        with np.errstate(divide="ignore"):
            return np.log(dens)


class PowerLawTail(BaseEstimator):
    """Log-log least-squares tail exponent of a log-binned density.

    With ``fit_range=None`` the widest acceptable window is picked
    automatically; see :func:`volherd.stats.select_fit_range`.
    """

    def __init__(self, bins_per_decade=20, fit_range=None, min_decades=DEFAULT_MIN_DECADES,
                 min_r_squared=DEFAULT_MIN_R_SQUARED, min_count=DEFAULT_MIN_COUNT):
        self.bins_per_decade = bins_per_decade
        self.fit_range = fit_range
        self.min_decades = min_decades
        self.min_r_squared = min_r_squared
        self.min_count = min_count

    def fit(self, X, y=None):
        self.histogram_ = log_binned_pdf(X, self.bins_per_decade)
        self.fit_ = fit_power_law_tail(self.histogram_, self.fit_range,
                                       min_decades=self.min_decades,
                                       min_r_squared=self.min_r_squared,
                                       min_count=self.min_count)
        self.exponent_ = self.fit_.exponent
        self.fit_range_ = self.fit_.fit_range
        self.r_squared_ = self.fit_.r_squared
        return self

    def predict(self, X):
        """Fitted density ``10**intercept * x**slope``."""
        check_is_fitted(self, "fit_")
        X = check_samples(X, positive=True)
        return 10.0 ** (self.fit_.intercept + self.fit_.slope * np.log10(X))


class HillTail(BaseEstimator):
    def __init__(self, tail_fraction=0.01):
        self.tail_fraction = tail_fraction

    def fit(self, X, y=None):
        self.fit_ = hill_tail_exponent(X, self.tail_fraction)
        self.exponent_ = self.fit_.exponent
        self.stderr_ = self.fit_.stderr
        self.threshold_ = self.fit_.fit_range[0]
        return self


class VolatilityAutocorrelation(BaseEstimator):
    """Autocorrelation of a series and its power-law decay exponent."""

    def __init__(self, max_lag=10_000, fit_range=(1, 1000)):
        self.max_lag = max_lag
        self.fit_range = fit_range

    def fit(self, X, y=None):
        self.acf_ = autocorrelation(X, self.max_lag)
        self.fit_ = fit_acf_decay(self.acf_, self.fit_range)
        self.exponent_ = self.fit_.exponent
        return self
