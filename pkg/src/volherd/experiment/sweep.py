"""One-parameter sweeps over independent runs."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..exceptions import ConfigurationError
from ..model.params import ExponentialKernel, RationalKernel
from .config import RunConfig
from .runner import run_simulation

log = logging.getLogger(__name__)

SWEEP_AXES = ("b", "c", "d", "M", "A", "seed")
COLUMNS = [
    "axis", "value", "seed", "status", "n_trades",
    "xi_V", "xi_N", "xi_abs_r", "power_law_V", "power_law_N", "power_law_abs_r",
    "fit_lower_V", "fit_upper_V", "r2_V", "fit_lower_N", "fit_upper_N", "r2_N",
    "fit_lower_abs_r", "fit_upper_abs_r", "r2_abs_r",
    "stderr_V", "stderr_N", "stderr_abs_r", "lambda", "lambda_trade_time", "error",
]


def derive_seed(base_seed: int, index: int) -> int:
    """Child seed for sweep row ``index``; distinct rows get independent streams."""
    return int(np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, np.uint64)[0])


def check_axis(base: RunConfig, axis: str) -> None:
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    kernel = base.params.kernel
    if axis == "b" and not isinstance(kernel, RationalKernel):
        raise ConfigurationError("axis b needs the rational kernel")
    if axis in ("c", "d") and not isinstance(kernel, ExponentialKernel):
        raise ConfigurationError(f"axis {axis} needs the exponential kernel")


def child_config(base: RunConfig, axis: str, value, index: int) -> RunConfig:
    check_axis(base, axis)
    params = base.params
    changes = {}
    if axis == "b":
        changes["kernel"] = RationalKernel(float(value))
    elif axis in ("c", "d"):
        changes["kernel"] = replace(params.kernel, **{axis: float(value)})
    elif axis == "M":
        changes["M"] = int(value)
    elif axis == "A":
        changes["A"] = float(value)
    changes["seed"] = int(value) if axis == "seed" else derive_seed(params.seed, index)
    out_dir = None if base.output_dir is None else Path(base.output_dir) / f"{axis}={value}"
    return replace(base, params=replace(params, **changes), output_dir=out_dir)


def _run_row(axis: str, value, config) -> dict:
    row = {c: "" for c in COLUMNS}
    row.update(axis=axis, value=value)
    try:
        if isinstance(config, Exception):
            raise config
        row["seed"] = config.params.seed
        art = run_simulation(config)
    except Exception as exc:  # recorded per row; the sweep carries on
        log.warning("sweep row %s=%s failed: %s", axis, value, exc)
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
        return row
    a = art.analysis
    row.update(status="ok", n_trades=a.n_trades, error="")
    for name, q in a.quantities.items():
        row[f"xi_{name}"] = q.exponent
        row[f"power_law_{name}"] = q.power_law
        if q.fit is not None:
            row[f"fit_lower_{name}"], row[f"fit_upper_{name}"] = q.fit.fit_range
            row[f"r2_{name}"] = q.fit.r_squared
            row[f"stderr_{name}"] = q.fit.stderr
    row["lambda"] = a.lam
    row["lambda_trade_time"] = a.lam_trades
    return row


def sweep(base: RunConfig, axis: str, values: Sequence, n_jobs: int = 1) -> list[dict]:
    """Run one child simulation per value and tabulate exponents and diagnostics.

    A value that yields an invalid configuration, or a child that fails,
    becomes a ``status="failed"`` row. Children run in separate processes
    when ``n_jobs > 1``. With an output
    directory the table is also written to ``sweep_<axis>.tsv``.
    """
    check_axis(base, axis)
    configs = []
    for i, v in enumerate(values):
        try:
            configs.append(child_config(base, axis, v, i))
        except (ConfigurationError, ValueError, TypeError) as exc:
            configs.append(exc)
    if not configs:
        return []
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(_run_row, [axis] * len(configs), list(values), configs))
    else:
        rows = [_run_row(axis, v, c) for v, c in zip(values, configs)]
    if base.output_dir is not None:
        Path(base.output_dir).mkdir(parents=True, exist_ok=True)
        write_table(rows, Path(base.output_dir) / f"sweep_{axis}.tsv")
    return rows


def write_table(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS, delimiter="\t")
        writer.writeheader()
        writer.writerows(rows)
