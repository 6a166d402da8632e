"""Run orchestration: simulations, sweeps, persistence and figure data."""

from .config import AnalysisConfig, RunConfig, load_config, save_config
from .figures import DESK, FIGURES, FULL, Scale, reproduce_figure, reproduce_figures
from .io import read_events, write_binary, write_text
from .runner import (
    AnalysisResult,
    RunAborted,
    RunArtifacts,
    analyze_events,
    analyze_path,
    run_simulation,
)
from .sweep import SWEEP_AXES, derive_seed, sweep

__all__ = [
    "AnalysisConfig", "RunConfig", "load_config", "save_config", "DESK", "FIGURES", "FULL",
    "Scale", "reproduce_figure", "reproduce_figures", "read_events", "write_binary",
    "write_text", "AnalysisResult", "RunAborted", "RunArtifacts", "analyze_events",
    "analyze_path", "run_simulation", "SWEEP_AXES", "derive_seed", "sweep",
]
