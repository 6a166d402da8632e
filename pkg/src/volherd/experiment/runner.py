"""Warmup/measurement runs, checkpointing and the statistics pipeline."""

from __future__ import annotations

import json
import logging
import math
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .. import __version__
from ..exceptions import InsufficientDataError, UnreliableFitError, VolherdError
from ..model import EventStream, init_market, load_snapshot, run, save_snapshot
from ..model.state import MarketState
from ..stats import (
    AcfResult,
    Histogram,
    PowerLawFit,
    autocorrelation,
    exponent_relation_report,
    fit_acf_decay,
    fit_power_law_tail,
    log_binned_pdf,
)
from ..stats.relation import ExponentRelation
from . import io
from .config import AnalysisConfig, RunConfig, save_config

log = logging.getLogger(__name__)

INCOMPLETE_MARKER = "RUN_INCOMPLETE"
CHECKPOINT_DIR = "checkpoint"
QUANTITIES = ("V", "N", "abs_r")
STEP_COUNT_NOTE = "iterations are counted as model steps (one agent selection each)"


class RunAborted(VolherdError):
    """A run stopped on an I/O failure; the output directory is marked incomplete."""


@dataclass
class QuantityStats:
    histogram: Optional[Histogram]
    fit: Optional[PowerLawFit]
    error: Optional[str] = None

    @property
    def power_law(self) -> bool:
        return self.fit is not None

    @property
    def exponent(self) -> float:
        return self.fit.exponent if self.fit is not None else math.nan


@dataclass
class AnalysisResult:
    n_steps: int
    n_trades: int
    quantities: dict[str, QuantityStats]
    acf: Optional[AcfResult]
    acf_fit: Optional[PowerLawFit]
    acf_error: Optional[str]
    acf_trades: Optional[AcfResult]
    acf_trades_fit: Optional[PowerLawFit]
    acf_trades_error: Optional[str]
    relation: Optional[ExponentRelation]
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    @property
    def xi_V(self) -> float:
        return self.quantities["V"].exponent

    @property
    def xi_N(self) -> float:
        return self.quantities["N"].exponent

    @property
    def xi_r(self) -> float:
        return self.quantities["abs_r"].exponent

    @property
    def lam(self) -> float:
        return self.acf_fit.exponent if self.acf_fit is not None else math.nan

    @property
    def lam_trades(self) -> float:
        return self.acf_trades_fit.exponent if self.acf_trades_fit is not None else math.nan

    def summary(self) -> dict:
        out = {"n_steps": self.n_steps, "n_trades": self.n_trades,
               "exponent_convention": "pdf ~ x^-(1+xi); C(tau) ~ tau^-lambda"}
        for name, q in self.quantities.items():
            out[f"xi_{name}"] = q.exponent
            out[f"power_law_{name}"] = q.power_law
            if q.fit is not None:
                out[f"fit_{name}"] = q.fit.as_dict()
            if q.error:
                out[f"error_{name}"] = q.error
        out["lambda"] = self.lam
        out["acf_series"] = "steps"
        if self.acf_fit is not None:
            out["fit_acf"] = self.acf_fit.as_dict()
        if self.acf_error:
            out["error_acf"] = self.acf_error
        out["lambda_trade_time"] = self.lam_trades
        if self.acf_trades_fit is not None:
            out["fit_acf_trade_time"] = self.acf_trades_fit.as_dict()
        if self.acf_trades_error:
            out["error_acf_trade_time"] = self.acf_trades_error
        if self.relation is not None:
            out["relation"] = {"dev_N_2V": self.relation.dev_N_2V,
                               "dev_r_N": self.relation.dev_r_N,
                               "tolerance": self.relation.tolerance,
                               "passed": self.relation.passed}
        return out


def _quantity(samples: np.ndarray, cfg: AnalysisConfig) -> QuantityStats:
    samples = samples[samples > 0]
    try:
        hist = log_binned_pdf(samples, cfg.bins_per_decade)
    except InsufficientDataError as exc:
        return QuantityStats(None, None, str(exc))
    try:
        fit = fit_power_law_tail(hist, None, min_decades=cfg.min_decades,
                                 min_r_squared=cfg.min_r_squared, min_count=cfg.min_count)
    except (UnreliableFitError, InsufficientDataError) as exc:
        return QuantityStats(hist, None, str(exc))
    return QuantityStats(hist, fit)


def _acf(series: np.ndarray, cfg: AnalysisConfig):
    try:
        acf = autocorrelation(series, cfg.acf_max_lag)
    except VolherdError as exc:
        return None, None, str(exc)
    try:
        return acf, fit_acf_decay(acf, cfg.acf_fit_range), None
    except VolherdError as exc:
        return acf, None, str(exc)


def analyze_events(events: EventStream, cfg: AnalysisConfig = AnalysisConfig()) -> AnalysisResult:
    """PDFs and tail fits of V, N, |r| over trade events, plus the |r| ACF.

    The primary ACF uses the per-step series (zeros on merge steps); the
    trade-time ACF over consecutive trades is reported alongside.
    """
    quantities = {
        "V": _quantity(events.V, cfg),
        "N": _quantity(events.N.astype(float), cfg),
        "abs_r": _quantity(np.abs(events.r), cfg),
    }
    acf, acf_fit, acf_err = _acf(events.step_series(), cfg)
    acf_t, acf_t_fit, acf_t_err = _acf(events.trade_series(), cfg)
    xi = [quantities[q].exponent for q in QUANTITIES]
    relation = (exponent_relation_report(*xi, tolerance=cfg.relation_tolerance)
                if all(math.isfinite(v) for v in xi) else None)
    return AnalysisResult(events.n_steps, len(events), quantities, acf, acf_fit, acf_err,
                          acf_t, acf_t_fit, acf_t_err, relation, cfg)


@dataclass
class RunArtifacts:
    output_dir: Optional[Path]
    time_series_path: Optional[Path]
    summary: dict
    metadata: dict
    events: EventStream
    analysis: AnalysisResult
    state: MarketState


def run_metadata(config: RunConfig, t_start: int) -> dict:
    return {
        "params": config.params.to_dict(),
        "seed": config.params.seed,
        "rng_algorithm_id": config.params.rng_algorithm_id,
        "code_version": __version__,
        "warmup_steps": config.warmup_steps,
        "measure_steps": config.measure_steps,
        "measure_t_start": t_start,
        "record_policy": config.record_policy,
        "stream_format": config.stream_format,
        "step_counting": STEP_COUNT_NOTE,
        "config": config.to_flat(),
    }


class _Checkpointer:
    def __init__(self, root: Optional[Path]):
        self.dir = None if root is None else root / CHECKPOINT_DIR

    def load(self):
        if self.dir is None or not (self.dir / "progress.json").exists():
            return None
        progress = json.loads((self.dir / "progress.json").read_text())
        state = load_snapshot(self.dir / "state.npz")
        parts = []
        if (self.dir / "events.npy").exists():
            ev = io.read_binary(self.dir / "events.npy", progress["measure_t_start"],
                                progress["measured"])
            parts.append(ev)
        return progress, state, parts

    def save(self, state, progress, parts):
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        tmp = self.dir / "state.npz.tmp"
        save_snapshot(state, tmp)
        tmp.replace(self.dir / "state.npz")
        if parts:
            events = EventStream.concatenate(parts)
            io.write_binary(events, self.dir / "events.tmp.npy")
            (self.dir / "events.tmp.npy").replace(self.dir / "events.npy")
        (self.dir / "progress.json").write_text(json.dumps(progress))

    def clear(self):
        if self.dir is not None and self.dir.exists():
            shutil.rmtree(self.dir)


def run_simulation(config: RunConfig) -> RunArtifacts:
    """Warm up, measure, persist and analyze one simulation.

    With ``output_dir`` set, an ``RUN_INCOMPLETE`` marker exists until the
    run finishes; a run with ``checkpoint_interval`` resumes from the last
    checkpoint in the same directory, producing the same events as an
    uninterrupted run.
    """
    started = time.perf_counter()
    out = None if config.output_dir is None else Path(config.output_dir)
    try:
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            (out / INCOMPLETE_MARKER).write_text("run in progress or aborted\n")
            save_config(config, out / "config.json")
    except OSError as exc:
        raise RunAborted(f"cannot prepare {out}: {exc}") from exc

    ckpt = _Checkpointer(out if config.checkpoint_interval else None)
    resumed = ckpt.load()
    if resumed is not None and resumed[0]["params"] == config.params.to_dict():
        progress, state, parts = resumed
        log.info("resuming at step %d", state.t)
    else:
        state = init_market(config.params)
        progress = {"params": config.params.to_dict(), "warmed": 0, "measured": 0,
                    "measure_t_start": config.warmup_steps}
        parts = []
    chunk = config.checkpoint_interval or max(config.warmup_steps, config.measure_steps, 1)

    try:
        while progress["warmed"] < config.warmup_steps:
            n = min(chunk, config.warmup_steps - progress["warmed"])
            run(state, n, record=False)
            progress["warmed"] += n
            if config.checkpoint_interval:
                ckpt.save(state, progress, parts)
        while progress["measured"] < config.measure_steps:
            n = min(chunk, config.measure_steps - progress["measured"])
            parts.append(run(state, n))
            progress["measured"] += n
            if config.checkpoint_interval:
                ckpt.save(state, progress, parts)
    except OSError as exc:
        raise RunAborted(f"checkpoint write failed: {exc}") from exc

    events = EventStream.concatenate(parts)
    events.t_start = progress["measure_t_start"]
    events.n_steps = config.measure_steps
    sim_seconds = time.perf_counter() - started
    analysis = analyze_events(events, config.analysis)
    summary = analysis.summary()
    summary["runtime_seconds"] = time.perf_counter() - started
    summary["simulation_seconds"] = sim_seconds
    metadata = run_metadata(config, events.t_start)

    series_path = None
    if out is not None:
        try:
            series_path = write_outputs(out, events, analysis, summary, metadata, config)
            ckpt.clear()
            (out / INCOMPLETE_MARKER).unlink()
        except OSError as exc:
            raise RunAborted(f"writing outputs to {out} failed: {exc}") from exc
    return RunArtifacts(out, series_path, summary, metadata, events, analysis, state)


def write_outputs(out: Path, events: EventStream, analysis: AnalysisResult, summary: dict,
                  metadata: dict, config: Optional[RunConfig] = None) -> Optional[Path]:
    series_path = None
    if config is not None:
        (out / "metadata.json").write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
        fmt = config.stream_format
        if fmt in ("binary", "both"):
            series_path = io.write_binary(events, out / io.BINARY_NAME, config.record_policy)
        if fmt in ("text", "both"):
            series_path = io.write_text(events, out / io.TEXT_NAME, config.record_policy)
    write_statistics(out, analysis, summary)
    return series_path


def write_statistics(out: Path, analysis: AnalysisResult, summary: dict) -> None:
    for name, q in analysis.quantities.items():
        if q.histogram is not None:
            (out / f"pdf_{name}.tsv").write_text(q.histogram.to_text())
    if analysis.acf is not None:
        (out / "acf.tsv").write_text(analysis.acf.to_text())
    if analysis.acf_trades is not None:
        (out / "acf_trade_time.tsv").write_text(analysis.acf_trades.to_text())
    (out / "summary.json").write_text(
        json.dumps(clean_for_json(summary), indent=2, sort_keys=True, default=_json_default) + "\n")
    (out / "summary.txt").write_text(summary_text(summary))


def clean_for_json(obj):
    """Recursively map numpy scalars to Python and non-finite floats to None."""
    if isinstance(obj, dict):
        return {k: clean_for_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean_for_json(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serializable: {type(o)}")


def summary_text(summary: dict, prefix: str = "") -> str:
    """Flatten a summary into ``key = value`` lines."""
    lines = []
    for k in sorted(summary):
        v = summary[k]
        if isinstance(v, dict):
            lines.append(summary_text(v, f"{prefix}{k}."))
        else:
            lines.append(f"{prefix}{k} = {v}\n")
    return "".join(lines)


def analyze_path(path, output_dir=None, cfg: Optional[AnalysisConfig] = None) -> AnalysisResult:
    """Re-run the statistics on a persisted event stream.

    ``path`` is an event file or a run directory. Without an explicit
    ``cfg`` the analysis settings stored in the run's metadata are used.
    """
    path = Path(path)
    events = io.read_events(path)
    if cfg is None:
        run_dir = path if path.is_dir() else path.parent
        meta_path = run_dir / "metadata.json"
        cfg = AnalysisConfig()
        if meta_path.exists():
            flat = json.loads(meta_path.read_text())["config"]
            cfg = RunConfig.from_flat(flat).analysis
    analysis = analyze_events(events, cfg)
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_statistics(out, analysis, analysis.summary())
    return analysis
