"""Plot-ready data for the figure targets Fig1a, Fig1b, Fig2, Fig3 and Fig4.

Each figure directory receives two-column text files (``x<TAB>y``) for
every curve, ``fit_*.tsv`` overlays of the fitted power laws, and a
``metadata.json`` recording scale, seeds and fitted exponents.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..exceptions import ConfigurationError
from ..model import ModelParams
from ..stats import PowerLawFit
from .config import RunConfig
from .runner import AnalysisResult, run_simulation

FIGURES = ("Fig1a", "Fig1b", "Fig2", "Fig3", "Fig4")


@dataclass(frozen=True)
class Scale:
    name: str
    M: int
    warmup_steps: int
    measure_steps: int
    # Smaller system shown next to the main b=0.45 curve in Fig1a.
    compare_M: int


DESK = Scale("desk", 40_000, 100_000, 10_000_000, 20_000)
FULL = Scale("full", 80_000, 1_000_000, 100_000_000, 40_000)
SCALES = {"desk": DESK, "full": FULL}


@dataclass
class FigureData:
    figure: str
    output_dir: Path
    files: list[Path] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def _scale(scale: Union[str, Scale]) -> Scale:
    if isinstance(scale, Scale):
        return scale
    try:
        return SCALES[str(scale).lower()]
    except KeyError:
        raise ConfigurationError(f"scale must be one of {sorted(SCALES)}") from None


class _Runs:
    """Memoizes runs so that figures sharing a configuration simulate once."""

    def __init__(self, scale: Scale, seed: int):
        self.scale = scale
        self.seed = seed
        self.cache: dict[tuple, AnalysisResult] = {}

    def get(self, kernel: str, value, M: Optional[int] = None) -> AnalysisResult:
        M = M or self.scale.M
        key = (kernel, value, M)
        if key not in self.cache:
            if kernel == "rational":
                params = ModelParams.rational(M, value, seed=self.seed)
            else:
                params = ModelParams.exponential(M, *value, seed=self.seed)
            config = RunConfig(params, warmup_steps=self.scale.warmup_steps,
                               measure_steps=self.scale.measure_steps)
            self.cache[key] = run_simulation(config).analysis
        return self.cache[key]


def _overlay(fit: PowerLawFit, n: int = 50) -> str:
    lo, hi = fit.fit_range
    x = np.logspace(np.log10(lo), np.log10(hi), n)
    y = 10.0 ** (fit.intercept + fit.slope * np.log10(x))
    head = f"# fitted {fit.convention} exponent = {fit.exponent:.6g} (slope {fit.slope:.6g})\n"
    return head + "".join(f"{a:.17g}\t{b:.17g}\n" for a, b in zip(x, y))


def _emit_pdf(fig: FigureData, analysis: AnalysisResult, quantity: str, label: str) -> None:
    q = analysis.quantities[quantity]
    entry = {"power_law": q.power_law, "exponent": q.exponent}
    if q.histogram is not None:
        path = fig.output_dir / f"pdf_{quantity}_{label}.tsv"
        path.write_text(q.histogram.to_text())
        fig.files.append(path)
    if q.fit is not None:
        path = fig.output_dir / f"fit_{quantity}_{label}.tsv"
        path.write_text(_overlay(q.fit))
        fig.files.append(path)
        entry.update(fit_range=list(q.fit.fit_range), r_squared=q.fit.r_squared)
    fig.metadata.setdefault("curves", {})[f"{quantity}_{label}"] = entry


def reproduce_figure(figure: str, scale: Union[str, Scale] = "desk", output_dir=".",
                     seed: int = 0, _runs: Optional[_Runs] = None) -> FigureData:
    """Simulate and write the data series behind one figure."""
    if figure not in FIGURES:
        raise ConfigurationError(f"figure must be one of {FIGURES}")
    sc = _scale(scale)
    runs = _runs or _Runs(sc, seed)
    out = Path(output_dir) / figure
    out.mkdir(parents=True, exist_ok=True)
    fig = FigureData(figure, out)
    fig.metadata.update(figure=figure, scale=asdict(sc), seed=seed,
                        exponent_convention="pdf ~ x^-(1+xi); C(tau) ~ tau^-lambda")

    if figure in ("Fig1a", "Fig1b"):
        quantity = "V" if figure == "Fig1a" else "N"
        for b in (0.30, 0.45, 0.60):
            _emit_pdf(fig, runs.get("rational", b), quantity, f"b={b:.2f}")
        if figure == "Fig1a":
            _emit_pdf(fig, runs.get("rational", 0.45, sc.compare_M), quantity,
                      f"b=0.45_M={sc.compare_M}")
    elif figure == "Fig2":
        _emit_pdf(fig, runs.get("rational", 0.45), "abs_r", "b=0.45")
    elif figure == "Fig3":
        a = runs.get("exponential", (1.0, 2.0))
        for quantity in ("V", "N", "abs_r"):
            _emit_pdf(fig, a, quantity, "c=1.0_d=2.0")
    else:
        a = runs.get("rational", 0.45)
        entry = {"lambda": a.lam, "error": a.acf_error, "lambda_trade_time": a.lam_trades}
        if a.acf is not None:
            path = out / "acf_b=0.45.tsv"
            path.write_text(a.acf.to_text())
            fig.files.append(path)
        if a.acf_fit is not None:
            path = out / "fit_acf_b=0.45.tsv"
            path.write_text(_overlay(a.acf_fit))
            fig.files.append(path)
            entry.update(r_squared=a.acf_fit.r_squared, fit_range=list(a.acf_fit.fit_range))
        fig.metadata["acf"] = entry

    meta_path = out / "metadata.json"
    meta_path.write_text(json.dumps(fig.metadata, indent=2, sort_keys=True) + "\n")
    fig.files.append(meta_path)
    return fig


def reproduce_figures(figures=FIGURES, scale: Union[str, Scale] = "desk", output_dir=".",
                      seed: int = 0) -> list[FigureData]:
    runs = _Runs(_scale(scale), seed)
    return [reproduce_figure(f, scale, output_dir, seed, runs) for f in figures]
