import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from volherd.exceptions import (
    DegenerateSeriesError,
    DomainError,
    InsufficientDataError,
    UnreliableFitError,
)
from volherd.stats import (
    AcfResult,
    Histogram,
    autocorrelation,
    exponent_relation_report,
    fit_acf_decay,
    fit_power_law_tail,
    hill_plateau,
    hill_tail_exponent,
    log_bin_edges,
    log_binned_pdf,
    select_fit_range,
)


def pareto(xi, n=1_000_000, seed=0):
    # classical Pareto with x_min = 1: P(X > x) = x**-xi
    return np.random.default_rng(seed).pareto(xi, n) + 1.0


def direct_acf(x, max_lag):
    n = x.size
    m = x.mean()
    var = (x * x).mean() - m * m
    return np.array([((x[: n - t] * x[t:]).mean() - m * m) / var for t in range(max_lag + 1)])


# -- histogram ---------------------------------------------------------------

def test_all_equal_samples_land_in_one_bin():
    h = log_binned_pdf(np.full(500, 3.7))
    assert h.occupied.sum() == 1
    assert h.total_mass() == pytest.approx(1.0)


def test_uniform_density():
    x = np.random.default_rng(1).uniform(1, 10, 1_000_000)
    h = log_binned_pdf(x)
    inner = h.occupied & (h.bin_edges[:-1] >= 1) & (h.bin_edges[1:] <= 10)
    assert np.allclose(h.densities[inner], 1 / 9, rtol=0.03)


def test_edges_are_decade_aligned():
    e = log_bin_edges(1.0, 1000.0, 20)
    assert e[0] == 1.0
    assert np.allclose(np.log10(e) * 20, np.round(np.log10(e) * 20))
    assert e[-1] > 1000.0


@settings(max_examples=40, deadline=None)
@given(x=hnp.arrays(np.float64, st.integers(100, 2000),
                    elements=st.floats(1e-6, 1e9, allow_nan=False)),
       bpd=st.integers(1, 40))
def test_histogram_normalization_property(x, bpd):
    h = log_binned_pdf(x, bpd)
    assert h.total_mass() == pytest.approx(1.0, rel=1e-9)
    assert h.counts.sum() == x.size
    assert h.bin_edges[0] <= x.min() and h.bin_edges[-1] > x.max()


@pytest.mark.parametrize("bad, err", [
    (np.ones(99), InsufficientDataError),
    (np.r_[np.ones(200), 0.0], DomainError),
    (np.r_[np.ones(200), -1.0], DomainError),
])
def test_histogram_rejects(bad, err):
    with pytest.raises(err):
        log_binned_pdf(bad)


def test_histogram_rejects_bad_resolution():
    with pytest.raises(DomainError):
        log_binned_pdf(np.ones(200), 0)


# -- log-log fits ------------------------------------------------------------

def exact_histogram(xi, lo=1.0, hi=1e4, bpd=20):
    edges = log_bin_edges(lo, hi, bpd)
    centers = np.sqrt(edges[:-1] * edges[1:])
    return Histogram(edges, centers ** -(1 + xi), 10**6, bpd, np.full(centers.size, 10**6))


@pytest.mark.parametrize("xi", [0.5, 0.97, 2.11])
def test_exact_power_law_is_recovered(xi):
    fit = fit_power_law_tail(exact_histogram(xi), (1.0, 1e4))
    assert fit.exponent == pytest.approx(xi, abs=1e-6)
    assert fit.r_squared == pytest.approx(1.0)
    assert not fit.curved


def test_selector_picks_whole_exact_range():
    w = select_fit_range(exact_histogram(1.2))
    assert w is not None and w.decades >= 3.9 and w.r_squared == pytest.approx(1.0)


@pytest.mark.parametrize("xi", [0.8, 1.5])
def test_pareto_recovery_automatic_window(xi):
    fit = fit_power_law_tail(log_binned_pdf(pareto(xi)))
    assert abs(fit.exponent - xi) <= 0.05
    assert fit.fit_range[1] / fit.fit_range[0] >= 100


def test_pareto_steep_tail_needs_explicit_window():
    # a million draws of xi=3 cover under two well-populated decades
    h = log_binned_pdf(pareto(3.0))
    with pytest.raises(UnreliableFitError):
        fit_power_law_tail(h)
    fit = fit_power_law_tail(h, min_decades=1.0)
    assert abs(fit.exponent - 3.0) <= 0.05
    assert fit.fit_range[1] < 50


def test_selector_rejects_exponential_tail():
    x = np.random.default_rng(3).exponential(1.0, 1_000_000) + 1.0
    assert select_fit_range(log_binned_pdf(x)) is None


def test_fit_range_too_narrow():
    with pytest.raises(InsufficientDataError):
        fit_power_law_tail(exact_histogram(1.0), (1.0, 1.5))
    with pytest.raises(DomainError):
        fit_power_law_tail(exact_histogram(1.0), (10.0, 1.0))


# -- Hill ----------------------------------------------------------------------

@pytest.mark.parametrize("xi", [0.8, 1.5, 3.0])
def test_hill_recovers_pareto(xi):
    fit = hill_tail_exponent(pareto(xi), 0.01)
    assert abs(fit.exponent - xi) <= 0.05
    assert fit.stderr == pytest.approx(fit.exponent / math.sqrt(10_000))


@pytest.mark.parametrize("xi, min_decades", [(0.8, 2.0), (1.5, 2.0), (3.0, 1.0)])
def test_hill_agrees_with_loglog(xi, min_decades):
    x = pareto(xi)
    ll = fit_power_law_tail(log_binned_pdf(x), min_decades=min_decades)
    hill = hill_tail_exponent(x, 0.01)
    assert abs(ll.exponent - hill.exponent) <= 2 * math.hypot(ll.stderr, hill.stderr)


def test_hill_plateau_stable_for_pareto():
    assert hill_plateau(pareto(1.5)).stable


def test_hill_plateau_drifts_for_exponential():
    x = np.random.default_rng(2).exponential(1.0, 1_000_000) + 1.0
    p = hill_plateau(x)
    assert not p.stable
    assert p.drift > 0.3


def test_hill_rejects_ties_and_small_samples():
    with pytest.raises(DegenerateSeriesError):
        hill_tail_exponent(np.ones(5000), 0.01)
    with pytest.raises(InsufficientDataError):
        hill_tail_exponent(pareto(1.0, n=500))
    with pytest.raises(DomainError):
        hill_tail_exponent(pareto(1.0, n=5000), 0.9)


# -- autocorrelation -----------------------------------------------------------

def test_acf_matches_direct_definition():
    x = np.abs(np.random.default_rng(4).standard_t(3, 10_000)) + 0.5
    acf = autocorrelation(x, 1000)
    assert np.max(np.abs(acf.values - direct_acf(x, 1000))) < 1e-9
    assert acf.values[0] == 1.0


@settings(max_examples=25, deadline=None)
@given(x=hnp.arrays(np.float64, st.integers(20, 400),
                    elements=st.floats(-1e3, 1e3, allow_nan=False)),
       lag=st.integers(0, 2))
def test_acf_matches_direct_property(x, lag):
    if np.ptp(x) < 1e-3:
        return
    acf = autocorrelation(x, lag)
    assert np.allclose(acf.values, direct_acf(x, lag), atol=1e-8)


def test_acf_white_noise():
    x = np.random.default_rng(5).uniform(size=200_000)
    acf = autocorrelation(x, 100)
    assert np.all(np.abs(acf.values[1:]) < 0.01)


def test_acf_ar1():
    rng = np.random.default_rng(6)
    n = 1_000_000
    eps = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = eps[0]
    for t in range(1, n):
        x[t] = 0.9 * x[t - 1] + eps[t]
    acf = autocorrelation(x, 20)
    assert np.all(np.abs(acf.values - 0.9 ** np.arange(21)) <= 0.02)


def test_acf_decay_exact_power_law():
    lags = np.arange(2001)
    values = np.r_[1.0, lags[1:] ** -0.3]
    fit = fit_acf_decay(AcfResult(lags, values, 10**6), (1, 1000))
    assert fit.exponent == pytest.approx(0.3, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.convention == "acf"


def test_acf_decay_flags_exponential_shape():
    lags = np.arange(201)
    exact = fit_acf_decay(AcfResult(lags, np.r_[1.0, lags[1:] ** -0.3], 10**5), (1, 100))
    expo = fit_acf_decay(AcfResult(lags, np.exp(-lags / 10.0), 10**5), (1, 100))
    assert expo.r_squared < exact.r_squared
    assert expo.curved


def test_acf_decay_drops_non_positive_lags():
    lags = np.arange(101)
    values = np.r_[1.0, lags[1:] ** -0.5]
    values[50:60] = -0.01
    fit = fit_acf_decay(AcfResult(lags, values, 10**5), (1, 100))
    assert fit.excluded_fraction == pytest.approx(0.1)
    assert fit.exponent == pytest.approx(0.5)
    values[1:] = -0.01
    with pytest.raises(UnreliableFitError):
        fit_acf_decay(AcfResult(lags, values, 10**5), (1, 100))


def test_acf_errors():
    with pytest.raises(DegenerateSeriesError):
        autocorrelation(np.ones(1000), 10)
    with pytest.raises(InsufficientDataError):
        autocorrelation(np.arange(50.0), 10)
    acf = autocorrelation(np.random.default_rng(0).random(1000), 50)
    with pytest.raises(InsufficientDataError):
        fit_acf_decay(acf, (1, 100))


# -- exponent relation -----------------------------------------------------------

def test_relation_examples():
    ok = exponent_relation_report(0.97, 2.11, 1.95)
    assert ok.passed
    assert ok.dev_N_2V == pytest.approx(0.17) and ok.dev_r_N == pytest.approx(0.16)
    assert not exponent_relation_report(0.5, 2.5, 1.0).passed
    with pytest.raises(DomainError):
        exponent_relation_report(math.nan, 2.0, 2.0)
