"""Acceptance criteria at desk scale.

Each test prints one ``PASS``/``FAIL`` line and adds it to the terminal
summary. Simulation runs are cached per module, so the heavy runs happen
once: M=40000 (and 80000 for the size comparison), 1e5 warmup steps and
1e7 measurement steps with a fixed seed.
"""

import math

import numpy as np
import pytest

from volherd.experiment import RunConfig, run_simulation
from volherd.model import ModelParams, ez_run, init_market, run
from volherd.stats import (
    autocorrelation,
    fit_power_law_tail,
    hill_tail_exponent,
    log_binned_pdf,
    select_fit_range,
)

pytestmark = pytest.mark.acceptance

SEED = 1
WARMUP = 100_000
STEPS = 10_000_000

_runs = {}


def desk_run(kernel, M=40_000):
    key = (kernel, M)
    if key not in _runs:
        if kernel == "exp":
            params = ModelParams.exponential(M, 1.0, 2.0, seed=SEED)
        else:
            params = ModelParams.rational(M, kernel, seed=SEED)
        config = RunConfig(params, warmup_steps=WARMUP, measure_steps=STEPS)
        _runs[key] = run_simulation(config).analysis
    return _runs[key]


def within(value, target, tol):
    return math.isfinite(value) and abs(value - target) <= tol


def report(lines, criterion, checks):
    """Record one line per criterion; ``checks`` maps a label to (passed, detail)."""
    ok = all(passed for passed, _ in checks.values())
    detail = "; ".join(f"{k}: {d} [{'ok' if p else 'miss'}]" for k, (p, d) in checks.items())
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    print(line)
    lines.append(line)
    assert ok, line


def test_criterion_1_rational_exponents(acceptance_report):
    a = desk_run(0.45)
    fit_V = a.quantities["V"].fit
    decades = math.log10(fit_V.fit_range[1] / fit_V.fit_range[0]) if fit_V else float("nan")
    report(acceptance_report, 1, {
        "P(V) window decades >= 2": (decades >= 2 - 1e-9, f"{decades:.2f}"),
        "xi_V = 0.97 +- 0.25": (within(a.xi_V, 0.97, 0.25), f"{a.xi_V:.3f}"),
        "xi_N = 2.11 +- 0.40": (within(a.xi_N, 2.11, 0.40), f"{a.xi_N:.3f}"),
        "xi_r = 1.95 +- 0.40": (within(a.xi_r, 1.95, 0.40), f"{a.xi_r:.3f}"),
    })


def test_criterion_2_exponent_relation(acceptance_report):
    a = desk_run(0.45)
    d1, d2 = abs(a.xi_N - 2 * a.xi_V), abs(a.xi_r - a.xi_N)
    report(acceptance_report, 2, {
        "|xi_N - 2 xi_V| <= 0.5": (d1 <= 0.5, f"{d1:.3f}"),
        "|xi_r - xi_N| <= 0.5": (d2 <= 0.5, f"{d2:.3f}"),
    })


def test_criterion_3_crossover(acceptance_report):
    low, high = desk_run(0.30), desk_run(0.45)
    report(acceptance_report, 3, {
        "b=0.30 no 2-decade P(V) window": (low.quantities["V"].fit is None,
                                           "none" if low.quantities["V"].fit is None
                                           else str(low.quantities["V"].fit.fit_range)),
        "b=0.45 window found": (high.quantities["V"].fit is not None, f"xi_V={high.xi_V:.3f}"),
    })


def test_criterion_4_exponential_kernel(acceptance_report):
    a = desk_run("exp")
    report(acceptance_report, 4, {
        "xi_V = 0.86 +- 0.3": (within(a.xi_V, 0.86, 0.3), f"{a.xi_V:.3f}"),
        "xi_N = 1.89 +- 0.4": (within(a.xi_N, 1.89, 0.4), f"{a.xi_N:.3f}"),
        "xi_r = 1.87 +- 0.4": (within(a.xi_r, 1.87, 0.4), f"{a.xi_r:.3f}"),
    })


def test_criterion_5_volatility_acf(acceptance_report):
    rat, exp = desk_run(0.45), desk_run("exp")
    report(acceptance_report, 5, {
        "lambda(rational) = 0.27 +- 0.15": (within(rat.lam, 0.27, 0.15), f"{rat.lam:.3f}"),
        "lambda(exp) > lambda(rational)": (math.isfinite(exp.lam) and exp.lam > rat.lam,
                                           f"{exp.lam:.3f} vs {rat.lam:.3f}"),
        "lambda(exp) in [0.3, 0.8]": (0.3 <= exp.lam <= 0.8, f"{exp.lam:.3f}"),
    })


def test_criterion_6_finite_size(acceptance_report):
    small, large = desk_run(0.45), desk_run(0.45, M=80_000)
    checks = {}
    for name, x, y in (("xi_V", small.xi_V, large.xi_V), ("xi_N", small.xi_N, large.xi_N),
                       ("xi_r", small.xi_r, large.xi_r)):
        checks[f"{name} M=40k vs 80k within 0.15"] = (within(x, y, 0.15), f"{x:.3f} vs {y:.3f}")
    report(acceptance_report, 6, checks)


def _direct_acf(x, max_lag):
    n, m = x.size, x.mean()
    var = (x * x).mean() - m * m
    return np.array([((x[: n - t] * x[t:]).mean() - m * m) / var for t in range(max_lag + 1)])


def test_criterion_7_property_suites(acceptance_report, tmp_path):
    checks = {}

    state = init_market(ModelParams.rational(1000, 0.45, seed=SEED))
    violations = 0
    for _ in range(20):
        run(state, 10_000, record=False)
        violations += state.partition.violations()
    checks["partition violations over 2e5 steps"] = (violations == 0, str(violations))

    paths = []
    for name in ("a", "b"):
        config = RunConfig(ModelParams.rational(2000, 0.45, seed=SEED), warmup_steps=10_000,
                           measure_steps=200_000, output_dir=tmp_path / name)
        paths.append(run_simulation(config).time_series_path)
    same = paths[0].read_bytes() == paths[1].read_bytes()
    checks["byte-identical event files"] = (same, str(same))

    # A million draws with xi=3 fill only about 1.4 well-populated decades,
    # so that tail is fitted with the width requirement relaxed to one decade.
    for xi, min_decades in ((0.8, 2.0), (1.5, 2.0), (3.0, 1.0)):
        x = np.random.default_rng(SEED).pareto(xi, 1_000_000) + 1.0
        ll = fit_power_law_tail(log_binned_pdf(x), min_decades=min_decades).exponent
        hill = hill_tail_exponent(x, 0.01).exponent
        checks[f"Pareto {xi} log-log"] = (within(ll, xi, 0.05), f"{ll:.4f}")
        checks[f"Pareto {xi} Hill"] = (within(hill, xi, 0.05), f"{hill:.4f}")

    x = np.abs(np.random.default_rng(SEED).standard_normal(10_000))
    diff = float(np.max(np.abs(autocorrelation(x, 1000).values - _direct_acf(x, 1000))))
    checks["ACF vs direct loop <= 1e-9"] = (diff <= 1e-9, f"{diff:.1e}")

    rng = np.random.default_rng(SEED)
    eps = rng.standard_normal(1_000_000)
    ar = np.empty_like(eps)
    ar[0] = eps[0]
    for t in range(1, ar.size):
        ar[t] = 0.9 * ar[t - 1] + eps[t]
    err = float(np.max(np.abs(autocorrelation(ar, 20).values - 0.9 ** np.arange(21))))
    checks["AR(1) ACF within 0.02"] = (err <= 0.02, f"{err:.4f}")
    report(acceptance_report, 7, checks)


def test_criterion_8_ez_baseline(acceptance_report):
    a = 0.02
    state = init_market(ModelParams.rational(40_000, 0.45, seed=SEED))
    ez_run(state, WARMUP, a)
    _, sizes = ez_run(state, STEPS, a)
    window = select_fit_range(log_binned_pdf(sizes.astype(float)), min_decades=1.5)
    report(acceptance_report, 8, {
        f"a={a}: P(s) window >= 1.5 decades, r^2 >= 0.98": (
            window is not None,
            "none" if window is None else f"{window.decades:.2f} decades, r^2={window.r_squared:.4f}"),
    })
