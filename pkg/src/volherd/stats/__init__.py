"""Heavy-tail and autocorrelation estimators."""

from .acf import AcfResult, autocorrelation, fit_acf_decay
from .histogram import Histogram, log_bin_edges, log_binned_pdf
from .powerlaw import (
    HILL,
    LOGLOG,
    FitWindow,
    HillPlateau,
    PowerLawFit,
    fit_power_law_tail,
    hill_plateau,
    hill_tail_exponent,
    select_fit_range,
)
from .relation import ExponentRelation, exponent_relation_report

__all__ = [
    "AcfResult", "autocorrelation", "fit_acf_decay", "Histogram", "log_bin_edges",
    "log_binned_pdf", "HILL", "LOGLOG", "FitWindow", "HillPlateau", "PowerLawFit",
    "fit_power_law_tail", "hill_plateau", "hill_tail_exponent", "select_fit_range",
    "ExponentRelation", "exponent_relation_report",
]
