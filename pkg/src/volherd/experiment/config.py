"""Run and analysis configuration.

Config files are flat JSON objects whose keys match the CLI flag names::

    {
      "kernel": "rational", "b": 0.45, "c": 1.0, "d": 2.0, "A": 50.0,
      "M": 40000, "seed": 7, "second_cluster": "uniform",
      "warmup": 100000, "steps": 10000000,
      "record_policy": "trades", "stream_format": "text",
      "output_dir": "runs/b045", "checkpoint_interval": null,
      "bins_per_decade": 20, "min_count": 20, "min_decades": 2.0,
      "min_r_squared": 0.98, "acf_max_lag": 10000,
      "acf_fit_lower": 1, "acf_fit_upper": 1000, "relation_tolerance": 0.5
    }

Missing keys take the defaults below; unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..exceptions import ConfigurationError
from ..model import ModelParams
from ..model.params import ExponentialKernel, RationalKernel
from ..stats.powerlaw import DEFAULT_MIN_COUNT, DEFAULT_MIN_DECADES, DEFAULT_MIN_R_SQUARED

RECORD_POLICIES = ("trades", "all")
STREAM_FORMATS = ("text", "binary", "both")


@dataclass(frozen=True)
class AnalysisConfig:
    bins_per_decade: int = 20
    min_count: int = DEFAULT_MIN_COUNT
    min_decades: float = DEFAULT_MIN_DECADES
    min_r_squared: float = DEFAULT_MIN_R_SQUARED
    acf_max_lag: int = 10_000
    acf_fit_range: tuple[int, int] = (1, 1000)
    relation_tolerance: float = 0.5

    def __post_init__(self):
        if self.bins_per_decade < 1:
            raise ConfigurationError("bins_per_decade must be >= 1")
        if self.acf_max_lag < 1:
            raise ConfigurationError("acf_max_lag must be >= 1")
        lo, hi = self.acf_fit_range
        if not 1 <= lo < hi <= self.acf_max_lag:
            raise ConfigurationError("acf fit range must satisfy 1 <= lower < upper <= acf_max_lag")


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    warmup_steps: int = 100_000
    measure_steps: int = 10_000_000
    record_policy: str = "trades"
    output_dir: Optional[Path] = None
    checkpoint_interval: Optional[int] = None
    stream_format: str = "text"
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self):
        if self.warmup_steps < 0:
            raise ConfigurationError("warmup_steps must be >= 0")
        if self.measure_steps < 1:
            raise ConfigurationError("measure_steps must be >= 1")
        if self.record_policy not in RECORD_POLICIES:
            raise ConfigurationError(f"record_policy must be one of {RECORD_POLICIES}")
        if self.stream_format not in STREAM_FORMATS:
            raise ConfigurationError(f"stream_format must be one of {STREAM_FORMATS}")
        if self.checkpoint_interval is not None and self.checkpoint_interval < 1:
            raise ConfigurationError("checkpoint_interval must be >= 1")

    def with_params(self, **changes) -> "RunConfig":
        return replace(self, params=replace(self.params, **changes))

    # -- flat (CLI / file) representation --------------------------------

    def to_flat(self) -> dict:
        p = self.params
        k = p.kernel
        a = self.analysis
        return {
            "kernel": k.name,
            "b": getattr(k, "b", DEFAULTS["b"]),
            "c": getattr(k, "c", DEFAULTS["c"]),
            "d": getattr(k, "d", DEFAULTS["d"]),
            "A": p.A,
            "M": p.M,
            "seed": p.seed,
            "second_cluster": p.second_cluster,
            "warmup": self.warmup_steps,
            "steps": self.measure_steps,
            "record_policy": self.record_policy,
            "stream_format": self.stream_format,
            "output_dir": None if self.output_dir is None else str(self.output_dir),
            "checkpoint_interval": self.checkpoint_interval,
            "bins_per_decade": a.bins_per_decade,
            "min_count": a.min_count,
            "min_decades": a.min_decades,
            "min_r_squared": a.min_r_squared,
            "acf_max_lag": a.acf_max_lag,
            "acf_fit_lower": a.acf_fit_range[0],
            "acf_fit_upper": a.acf_fit_range[1],
            "relation_tolerance": a.relation_tolerance,
        }

    @classmethod
    def from_flat(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        d = {**DEFAULTS, **{k: v for k, v in data.items() if v is not None}}
        try:
            if d["kernel"] == "rational":
                kernel = RationalKernel(float(d["b"]))
            elif d["kernel"] == "exponential":
                kernel = ExponentialKernel(float(d["c"]), float(d["d"]))
            else:
                raise ConfigurationError(f"unknown kernel {d['kernel']!r}")
            params = ModelParams(M=_as_int(d["M"], "M"), kernel=kernel, A=float(d["A"]),
                                 seed=_as_int(d["seed"], "seed"),
                                 second_cluster=d["second_cluster"])
            analysis = AnalysisConfig(
                bins_per_decade=_as_int(d["bins_per_decade"], "bins_per_decade"),
                min_count=_as_int(d["min_count"], "min_count"),
                min_decades=float(d["min_decades"]),
                min_r_squared=float(d["min_r_squared"]),
                acf_max_lag=_as_int(d["acf_max_lag"], "acf_max_lag"),
                acf_fit_range=(_as_int(d["acf_fit_lower"], "acf_fit_lower"),
                               _as_int(d["acf_fit_upper"], "acf_fit_upper")),
                relation_tolerance=float(d["relation_tolerance"]),
            )
            return cls(
                params=params,
                warmup_steps=_as_int(d["warmup"], "warmup"),
                measure_steps=_as_int(d["steps"], "steps"),
                record_policy=d["record_policy"],
                output_dir=None if d["output_dir"] is None else Path(d["output_dir"]),
                checkpoint_interval=(None if d["checkpoint_interval"] is None
                                     else _as_int(d["checkpoint_interval"], "checkpoint_interval")),
                stream_format=d["stream_format"],
                analysis=analysis,
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(str(exc)) from exc


def _as_int(value, name: str) -> int:
    # Accept 1e7-style floats from JSON as long as they are integral.
    if isinstance(value, bool):
        raise ConfigurationError(f"{name} must be an integer")
    if isinstance(value, float):
        if not value.is_integer():
            raise ConfigurationError(f"{name} must be an integer, got {value}")
        return int(value)
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}") from exc


DEFAULTS = {
    "kernel": "rational",
    "b": 0.45,
    "c": 1.0,
    "d": 2.0,
    "A": 50.0,
    "M": 40_000,
    "seed": 0,
    "second_cluster": "uniform",
    "warmup": 100_000,
    "steps": 10_000_000,
    "record_policy": "trades",
    "stream_format": "text",
    "output_dir": None,
    "checkpoint_interval": None,
    "bins_per_decade": 20,
    "min_count": DEFAULT_MIN_COUNT,
    "min_decades": DEFAULT_MIN_DECADES,
    "min_r_squared": DEFAULT_MIN_R_SQUARED,
    "acf_max_lag": 10_000,
    "acf_fit_lower": 1,
    "acf_fit_upper": 1000,
    "relation_tolerance": 0.5,
}


def read_config_file(path) -> dict:
    """Raw flat settings of a config file, not yet validated."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return data


def load_config(path) -> RunConfig:
    return RunConfig.from_flat(read_config_file(path))


def save_config(config: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_flat(), indent=2, sort_keys=True) + "\n")
