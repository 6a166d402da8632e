"""Power-law tail exponents: log-log regression on binned densities and Hill."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from .._validation import check_samples
from ..exceptions import DegenerateSeriesError, DomainError, InsufficientDataError, UnreliableFitError
from .histogram import Histogram

LOGLOG = "LogLogLeastSquares"
HILL = "Hill"

MIN_FIT_BINS = 5
# Window rules for automatic range selection.
DEFAULT_MIN_DECADES = 2.0
DEFAULT_MIN_R_SQUARED = 0.98
# >= 20 events per bin keeps the Poisson error of log10(density) under ~0.1.
DEFAULT_MIN_COUNT = 20


@dataclass(frozen=True)
class PowerLawFit:
    """A fitted power law.

    ``exponent`` follows ``convention``: ``"pdf"`` means the density decays as
    x**-(1 + exponent) (exponent = -slope - 1), ``"acf"`` means
    C(tau) ~ tau**-exponent, ``"tail"`` is the survival-function exponent
    reported by Hill.
    """

    exponent: float
    intercept: float
    fit_range: tuple[float, float]
    stderr: float
    r_squared: float
    method: str
    convention: str = "pdf"
    slope: float = float("nan")
    n_points: int = 0
    excluded_fraction: float = 0.0
    curvature: float = 0.0
    curved: bool = False

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "fit_lower": self.fit_range[0],
            "fit_upper": self.fit_range[1],
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "method": self.method,
            "convention": self.convention,
            "slope": self.slope,
            "n_points": self.n_points,
            "excluded_fraction": self.excluded_fraction,
            "curvature": self.curvature,
            "curved": self.curved,
        }

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.as_dict().items())


def _loglog_fit(x, y):
    lx, ly = np.log10(x), np.log10(y)
    if np.ptp(lx) == 0:
        raise InsufficientDataError("fit needs at least two distinct abscissae")
    res = sps.linregress(lx, ly)
    resid = ly - (res.intercept + res.slope * lx)
    ss_lin = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_lin / ss_tot
    curvature, curved = 0.0, False
    if lx.size >= 4:
        coef = np.polyfit(lx, ly, 2)
        resid2 = ly - np.polyval(coef, lx)
        ss_quad = float(resid2 @ resid2)
        curvature = float(coef[0])
        # Curvature is flagged when a quadratic term removes at least half of
        # the residual that the straight line leaves behind.
        curved = ss_lin > 1e-12 * max(ss_tot, 1e-300) and (ss_lin - ss_quad) >= 0.5 * ss_lin
    return res, r2, curvature, curved


@dataclass(frozen=True)
class FitWindow:
    lower: float
    upper: float
    decades: float
    r_squared: float
    n_bins: int


def _candidate_bins(hist: Histogram, min_count: int) -> np.ndarray:
    """Occupied bins from the modal bin up to the first thinly populated one."""
    counts = hist.counts
    if counts is None:
        counts = np.where(hist.occupied, min_count, 0)
    start = int(np.argmax(counts))
    idx = []
    for k in range(start, counts.size):
        if counts[k] == 0:
            continue
        if counts[k] < min_count:
            break
        idx.append(k)
    return np.asarray(idx, dtype=np.int64)


def select_fit_range(hist: Histogram, min_decades: float = DEFAULT_MIN_DECADES,
                     min_r_squared: float = DEFAULT_MIN_R_SQUARED,
                     min_count: int = DEFAULT_MIN_COUNT,
                     min_bins: int = MIN_FIT_BINS) -> Optional[FitWindow]:
    """Widest window of well-populated tail bins that looks like a power law.

    Candidates are occupied bins from the modal (most populated) bin onward,
    stopping at the first occupied bin with fewer than ``min_count`` events.
    Among contiguous candidate windows spanning at least ``min_decades`` with
    ``r_squared >= min_r_squared`` in log-log space, the widest wins (ties by
    r_squared). Returns None when no window qualifies.
    """
    idx = _candidate_bins(hist, min_count)
    if idx.size < min_bins:
        return None
    x = np.log10(hist.centers[idx])
    y = np.log10(hist.densities[idx])
    # Prefix sums give every window's regression statistics in O(1).
    z = lambda a: np.concatenate([[0.0], np.cumsum(a)])  # noqa: E731
    Sx, Sy, Sxx, Syy, Sxy = z(x), z(y), z(x * x), z(y * y), z(x * y)
    a, b = np.meshgrid(np.arange(idx.size), np.arange(idx.size), indexing="ij")
    n = (b - a + 1).astype(float)
    sx, sy = Sx[b + 1] - Sx[a], Sy[b + 1] - Sy[a]
    sxx, syy, sxy = Sxx[b + 1] - Sxx[a], Syy[b + 1] - Syy[a], Sxy[b + 1] - Sxy[a]
    vx = n * sxx - sx * sx
    vy = n * syy - sy * sy
    cov = n * sxy - sx * sy
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(vy > 0, cov * cov / (vx * vy), 1.0)
    decades = x[b] - x[a]
    ok = (n >= min_bins) & (decades >= min_decades - 1e-12) & (r2 >= min_r_squared) & (vx > 0)
    if not ok.any():
        return None
    cand = np.flatnonzero(ok)
    order = np.lexsort((r2.ravel()[cand], decades.ravel()[cand]))
    best = cand[order[-1]]
    ia, ib = a.ravel()[best], b.ravel()[best]
    return FitWindow(float(hist.centers[idx[ia]]), float(hist.centers[idx[ib]]),
                     float(decades.ravel()[best]), float(r2.ravel()[best]), int(ib - ia + 1))


def fit_power_law_tail(hist: Histogram, fit_range: Optional[Sequence[float]] = None, *,
                       convention: str = "pdf", min_decades: float = DEFAULT_MIN_DECADES,
                       min_r_squared: float = DEFAULT_MIN_R_SQUARED,
                       min_count: int = DEFAULT_MIN_COUNT) -> PowerLawFit:
    """Least-squares line through (log center, log density) of occupied bins.

    With ``fit_range=None`` the window comes from :func:`select_fit_range`
    and :class:`UnreliableFitError` is raised if none qualifies. Bin centers
    inside the closed ``fit_range`` are used.
    """
    if convention not in ("pdf", "acf"):
        raise DomainError(f"unknown convention {convention!r}")
    if fit_range is None:
        window = select_fit_range(hist, min_decades, min_r_squared, min_count)
        if window is None:
            raise UnreliableFitError("no power-law window found")
        fit_range = (window.lower, window.upper)
    lo, hi = float(fit_range[0]), float(fit_range[1])
    if not lo < hi:
        raise DomainError("fit_range must satisfy lower < upper")
    c = hist.centers
    # Relative slack so that range ends taken from bin centers round-trip.
    mask = hist.occupied & (c >= lo * (1 - 1e-12)) & (c <= hi * (1 + 1e-12))
    if mask.sum() < MIN_FIT_BINS:
        raise InsufficientDataError(
            f"need >= {MIN_FIT_BINS} occupied bins in range, got {int(mask.sum())}")
    res, r2, curvature, curved = _loglog_fit(c[mask], hist.densities[mask])
    exponent = -res.slope - 1.0 if convention == "pdf" else -res.slope
    return PowerLawFit(
        exponent=float(exponent), intercept=float(res.intercept), fit_range=(lo, hi),
        stderr=float(res.stderr), r_squared=float(r2), method=LOGLOG, convention=convention,
        slope=float(res.slope), n_points=int(mask.sum()), curvature=curvature, curved=curved,
    )


def hill_tail_exponent(samples, tail_fraction: float = 0.01) -> PowerLawFit:
    """Hill maximum-likelihood estimate of the survival-function exponent.

    Uses the ``k = floor(n * tail_fraction)`` largest order statistics with
    threshold at the (k+1)-th largest value; stderr = exponent / sqrt(k).
    """
    if not (0 < tail_fraction <= 0.5):
        raise DomainError("tail_fraction must lie in (0, 0.5]")
    x = check_samples(samples, positive=True, min_samples=1000)
    k = int(np.floor(x.size * tail_fraction))
    if k < 2:
        raise InsufficientDataError("tail_fraction leaves fewer than 2 tail points")
    top = -np.partition(-x, k)[: k + 1]
    top.sort()
    threshold = top[0]
    logs = np.log(top[1:] / threshold)
    mean_log = float(logs.mean())
    if mean_log <= 0:
        raise DegenerateSeriesError("tail has zero log-spacing (tied values)")
    xi = 1.0 / mean_log
    return PowerLawFit(
        exponent=xi, intercept=float(np.log10(k / x.size) + xi * np.log10(threshold)),
        fit_range=(float(threshold), float(top[-1])), stderr=xi / np.sqrt(k),
        r_squared=float("nan"), method=HILL, convention="tail", n_points=k,
    )


@dataclass(frozen=True)
class HillPlateau:
    tail_fractions: np.ndarray
    exponents: np.ndarray
    stderrs: np.ndarray
    drift: float
    stable: bool = field(default=False)


def hill_plateau(samples, tail_fractions: Sequence[float] = (0.001, 0.003, 0.01, 0.03, 0.1)) -> HillPlateau:
    """Hill estimates across tail fractions.

    ``drift`` is the spread relative to the mean estimate. ``stable`` holds
    when every pair of estimates differs by at most two combined standard
    errors, i.e. the estimates sit on a plateau.
    """
    fits = [hill_tail_exponent(samples, f) for f in tail_fractions]
    xi = np.array([f.exponent for f in fits])
    se = np.array([f.stderr for f in fits])
    diff = np.abs(xi[:, None] - xi[None, :])
    bound = 2.0 * np.sqrt(se[:, None] ** 2 + se[None, :] ** 2)
    return HillPlateau(np.asarray(tail_fractions, float), xi, se,
                       float(np.ptp(xi) / xi.mean()), bool(np.all(diff <= bound)))
