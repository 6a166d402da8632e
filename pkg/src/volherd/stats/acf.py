"""Normalized autocorrelation of a series and its power-law decay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import fft as sfft

from .._validation import check_series
from ..exceptions import DegenerateSeriesError, DomainError, InsufficientDataError, UnreliableFitError
from .powerlaw import LOGLOG, PowerLawFit, _loglog_fit


@dataclass(frozen=True)
class AcfResult:
    lags: np.ndarray
    values: np.ndarray
    series_length: int

    def to_text(self, delimiter: str = "\t") -> str:
        lines = [f"# lag{delimiter}C  (series_length={self.series_length})"]
        lines += [f"{int(t)}{delimiter}{c:.17g}" for t, c in zip(self.lags, self.values)]
        return "\n".join(lines) + "\n"


def autocorrelation(series, max_lag: int) -> AcfResult:
    """C(tau) = (<x_t x_{t+tau}> - <x>^2) / (<x^2> - <x>^2), tau = 0..max_lag.

    The lagged product is averaged over the ``n - tau`` available pairs, the
    moments over the whole series. Products are accumulated on the centered
    series via FFT; the partial-window mean corrections restore the exact
    uncentered definition.
    """
    max_lag = int(max_lag)
    if max_lag < 0:
        raise DomainError("max_lag must be non-negative")
    x = check_series(series, min_length=max(2, 10 * max_lag))
    n = x.size
    m = x.mean()
    y = x - m
    var = float(y @ y) / n
    if var <= 0:
        raise DegenerateSeriesError("series has zero variance")
    size = sfft.next_fast_len(2 * n, real=True)
    f = sfft.rfft(y, size)
    prod = sfft.irfft(f * np.conj(f), size)[: max_lag + 1]
    lags = np.arange(max_lag + 1)
    pairs = n - lags
    cy = np.concatenate([[0.0], np.cumsum(y)])
    head_sum = cy[n - lags]            # sum of y[0 : n - tau]
    tail_sum = cy[n] - cy[lags]        # sum of y[tau : n]
    # x_t x_{t+tau} - m^2 = y_t y_{t+tau} + m (y_t + y_{t+tau})
    cov = (prod + m * (head_sum + tail_sum)) / pairs
    values = cov / var
    values[0] = 1.0
    return AcfResult(lags, values, n)


def fit_acf_decay(acf: AcfResult, fit_range: Sequence[int] = (1, 1000)) -> PowerLawFit:
    """Fit C(tau) ~ tau**-lambda by log-log least squares over ``fit_range``.

    Lags with C <= 0 are dropped and reported through ``excluded_fraction``;
    more than half dropped raises :class:`UnreliableFitError`.
    """
    lo, hi = int(fit_range[0]), int(fit_range[1])
    if not 1 <= lo < hi:
        raise DomainError("fit_range must satisfy 1 <= lower < upper")
    if hi > acf.lags[-1]:
        raise InsufficientDataError(f"ACF only reaches lag {acf.lags[-1]}, fit needs {hi}")
    sel = (acf.lags >= lo) & (acf.lags <= hi)
    tau = acf.lags[sel].astype(float)
    c = acf.values[sel]
    keep = c > 0
    excluded = 1.0 - keep.mean()
    if excluded > 0.5:
        raise UnreliableFitError(f"{excluded:.0%} of lags in range have C <= 0")
    if keep.sum() < 2:
        raise InsufficientDataError("fewer than two positive lags in range")
    res, r2, curvature, curved = _loglog_fit(tau[keep], c[keep])
    return PowerLawFit(
        exponent=float(-res.slope), intercept=float(res.intercept), fit_range=(float(lo), float(hi)),
        stderr=float(res.stderr), r_squared=float(r2), method=LOGLOG, convention="acf",
        slope=float(res.slope), n_points=int(keep.sum()), excluded_fraction=float(excluded),
        curvature=curvature, curved=curved,
    )
