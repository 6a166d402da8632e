"""Event-stream files.

Text format (``events.tsv``)::

    # volherd-events v1 t_start=<int> n_steps=<int> policy=<trades|all>
    t	traded	V	N	Q	r
    <one row per trade, or per step under policy=all>

Floats are written with 17 significant digits so a read-back is exact.
The binary mirror (``events.npy``) is a structured array with the same
columns; its ``t_start``/``n_steps`` live in the run's ``metadata.json``.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from ..exceptions import ConfigurationError
from ..model import EventStream

TEXT_NAME = "events.tsv"
BINARY_NAME = "events.npy"
HEADER_RE = re.compile(r"#\s*volherd-events v1 t_start=(\d+) n_steps=(\d+) policy=(\w+)")
EVENT_DTYPE = np.dtype([("t", "<i8"), ("traded", "u1"), ("V", "<f8"), ("N", "<i8"),
                        ("Q", "<f8"), ("r", "<f8")])


def _table(events: EventStream, policy: str) -> np.ndarray:
    if policy == "all":
        table = np.zeros(events.n_steps, dtype=EVENT_DTYPE)
        table["t"] = np.arange(events.t_start, events.t_start + events.n_steps)
        rows = events.t - events.t_start
    else:
        table = np.zeros(len(events), dtype=EVENT_DTYPE)
        rows = np.arange(len(events))
        table["t"] = events.t
    table["traded"][rows] = 1
    for name in ("V", "N", "Q", "r"):
        table[name][rows] = getattr(events, name)
    return table


def write_text(events: EventStream, path, policy: str = "trades") -> Path:
    path = Path(path)
    table = _table(events, policy)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# volherd-events v1 t_start={events.t_start} n_steps={events.n_steps} "
                 f"policy={policy}\n")
        fh.write("t\ttraded\tV\tN\tQ\tr\n")
        np.savetxt(fh, table, fmt=["%d", "%d", "%.17g", "%d", "%.17g", "%.17g"], delimiter="\t")
    return path


def write_binary(events: EventStream, path, policy: str = "trades") -> Path:
    path = Path(path)
    np.save(path, _table(events, policy), allow_pickle=False)
    return path


def _from_table(table: np.ndarray, t_start: int, n_steps: int) -> EventStream:
    table = table[table["traded"] == 1]
    return EventStream(
        np.ascontiguousarray(table["t"], dtype=np.int64),
        np.ascontiguousarray(table["V"], dtype=float),
        np.ascontiguousarray(table["N"], dtype=np.int64),
        np.ascontiguousarray(table["Q"], dtype=float),
        np.ascontiguousarray(table["r"], dtype=float),
        t_start, n_steps,
    )


def read_text(path) -> EventStream:
    path = Path(path)
    with open(path) as fh:
        m = HEADER_RE.match(fh.readline())
        if m is None:
            raise ConfigurationError(f"{path} is not a volherd event file")
        fh.readline()
        table = np.loadtxt(fh, delimiter="\t", dtype=EVENT_DTYPE, ndmin=1)
    return _from_table(table, int(m.group(1)), int(m.group(2)))


def read_binary(path, t_start: int, n_steps: int) -> EventStream:
    table = np.load(path, allow_pickle=False)
    if table.dtype != EVENT_DTYPE:
        raise ConfigurationError(f"{path} does not hold volherd events")
    return _from_table(table, t_start, n_steps)


def read_events(path) -> EventStream:
    """Load an event file, or the stream of a run directory."""
    path = Path(path)
    if path.is_dir():
        for name in (BINARY_NAME, TEXT_NAME):
            if (path / name).exists():
                return read_events(path / name)
        raise ConfigurationError(f"no event stream in {path}")
    if path.suffix == ".npy":
        meta_path = path.parent / "metadata.json"
        if not meta_path.exists():
            raise ConfigurationError(f"{path} needs metadata.json next to it")
        meta = json.loads(meta_path.read_text())
        return read_binary(path, int(meta["measure_t_start"]), int(meta["measure_steps"]))
    return read_text(path)
