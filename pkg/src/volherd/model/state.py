"""Market state, the public dynamics API and checkpoint snapshots."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..exceptions import ConfigurationError, DomainError
from . import _kernels as K
from .params import ModelParams

SNAPSHOT_FORMAT = "volherd-snapshot"
SNAPSHOT_VERSION = 1

# Upper bound on steps handed to the compiled loop at once; bounds the
# scratch buffers to a few tens of MB.
CHUNK_STEPS = 1_000_000


@dataclass(frozen=True)
class AgentState:
    sign: int
    last_trade_volume: float
    cluster_id: int


@dataclass(frozen=True)
class TradeRecord:
    V: float
    N: int
    Q: float
    r: float


@dataclass(frozen=True)
class StepOutcome:
    t: int
    traded: bool
    trade: Optional[TradeRecord] = None


class ClusterPartition:
    """Mutable view over the partition arrays of a :class:`MarketState`."""

    def __init__(self, M: int):
        self.cid = np.arange(M, dtype=np.int64)
        self.nxt = np.full(M, -1, dtype=np.int64)
        self.head = np.arange(M, dtype=np.int64)
        self.tail = np.arange(M, dtype=np.int64)
        self.size = np.ones(M, dtype=np.int64)
        self.csign = np.ones(M, dtype=np.int8)
        self.active = np.arange(M, dtype=np.int64)
        self.pos = np.arange(M, dtype=np.int64)
        # [t, cluster_count]; t lives here so the compiled loop can bump it.
        self.ctr = np.array([0, M], dtype=np.int64)

    ARRAYS = ("cid", "nxt", "head", "tail", "size", "csign", "active", "pos", "ctr")

    @property
    def M(self) -> int:
        return self.cid.shape[0]

    @property
    def cluster_count(self) -> int:
        return int(self.ctr[1])

    @property
    def agent_to_cluster(self) -> np.ndarray:
        return self.cid

    def cluster_ids(self) -> np.ndarray:
        return np.sort(self.active[: self.cluster_count])

    def members(self, cluster_id: int) -> list[int]:
        out = []
        m = int(self.head[cluster_id])
        while m != -1:
            out.append(m)
            m = int(self.nxt[m])
        return out

    @property
    def clusters(self) -> dict[int, list[int]]:
        return {int(c): self.members(int(c)) for c in self.cluster_ids()}

    def cluster_sign(self, cluster_id: int) -> int:
        return int(self.csign[cluster_id])

    def cluster_size(self, cluster_id: int) -> int:
        return int(self.size[cluster_id])

    def cluster_sizes(self) -> np.ndarray:
        return self.size[self.active[: self.cluster_count]].copy()

    def is_cluster(self, cluster_id: int) -> bool:
        c = int(cluster_id)
        return 0 <= c < self.M and self.cid[c] == c

    def violations(self) -> int:
        return int(K.check_partition(self.cid, self.nxt, self.head, self.tail, self.size,
                                     self.csign, self.active, self.pos, self.ctr))

    def copy(self) -> "ClusterPartition":
        new = ClusterPartition.__new__(ClusterPartition)
        for name in self.ARRAYS:
            setattr(new, name, getattr(self, name).copy())
        return new


@dataclass
class MarketState:
    params: ModelParams
    partition: ClusterPartition
    vlast: np.ndarray
    rng: np.random.Generator
    vl: np.ndarray = field(default_factory=lambda: np.ones(1))

    @property
    def t(self) -> int:
        return int(self.partition.ctr[0])

    @property
    def V_last(self) -> float:
        return float(self.vl[0])

    @property
    def M(self) -> int:
        return self.params.M

    def agent(self, k: int) -> AgentState:
        c = int(self.partition.cid[k])
        return AgentState(int(self.partition.csign[c]), float(self.vlast[k]), c)

    @property
    def agents(self) -> list[AgentState]:
        return [self.agent(k) for k in range(self.M)]

    def signs(self) -> np.ndarray:
        """Per-agent trade signs."""
        return self.partition.csign[self.partition.cid].astype(np.int64)

    def copy(self) -> "MarketState":
        rng = np.random.Generator(np.random.PCG64())
        rng.bit_generator.state = self.rng.bit_generator.state
        return MarketState(self.params, self.partition.copy(), self.vlast.copy(), rng, self.vl.copy())

    def _kernel_args(self):
        p = self.partition
        return (p.cid, p.nxt, p.head, p.tail, p.size, p.csign, p.active, p.pos)


def _mode_code(params: ModelParams) -> int:
    return K.UNIFORM if params.second_cluster == "uniform" else K.SIZE_BIASED


def init_market(params: ModelParams) -> MarketState:
    """Fresh state: M singleton clusters, unit volumes, random signs, V_last = 1."""
    if not isinstance(params, ModelParams):
        raise ConfigurationError("init_market expects ModelParams")
    rng = np.random.Generator(np.random.PCG64(int(params.seed)))
    partition = ClusterPartition(params.M)
    partition.csign[:] = np.where(rng.random(params.M) < 0.5, 1, -1)
    return MarketState(params, partition, np.ones(params.M), rng, np.ones(1))


def trading_probability_of(state: MarketState, agent: int) -> float:
    p1, p2 = state.params.kernel.coefficients
    return float(K.probability(state.params.kernel.code, p1, p2, state.V_last / state.vlast[agent]))


def merge_clusters(partition: ClusterPartition, cluster_a: int, cluster_b: int) -> Optional[int]:
    """Merge two clusters and return the surviving id.

    The larger cluster keeps its id and sign; on equal sizes ``cluster_a``
    wins, so callers pass the selected agent's cluster first. Returns None
    when both ids name the same cluster.
    """
    for c in (cluster_a, cluster_b):
        if not partition.is_cluster(c):
            raise DomainError(f"{c} is not a live cluster id")
    p = partition
    out = K.merge(int(cluster_a), int(cluster_b), p.cid, p.nxt, p.head, p.tail, p.size,
                  p.active, p.pos, p.ctr)
    return None if out < 0 else int(out)


def execute_trade(state: MarketState, cluster_a: int, cluster_b: int) -> TradeRecord:
    """Let ``cluster_a`` and ``cluster_b`` trade, then shatter both."""
    p = state.partition
    for c in (cluster_a, cluster_b):
        if not p.is_cluster(c):
            raise DomainError(f"{c} is not a live cluster id")
    if cluster_a == cluster_b and p.cluster_count > 1:
        raise DomainError("a cluster can only trade alone when it is the only cluster")
    p1, p2 = state.params.kernel.coefficients
    V, N, Q, r = K.trade(state.rng, int(cluster_a), int(cluster_b), state.params.kernel.code,
                         p1, p2, state.params.A, *state._kernel_args(), state.vlast,
                         p.ctr, state.vl)
    return TradeRecord(float(V), int(N), float(Q), float(r))


def step(state: MarketState) -> StepOutcome:
    t = state.t
    p1, p2 = state.params.kernel.coefficients
    traded, V, N, Q, r = K.step(state.rng, state.params.kernel.code, p1, p2, state.params.A,
                                _mode_code(state.params), *state._kernel_args(), state.vlast,
                                state.partition.ctr, state.vl)
    if traded:
        return StepOutcome(t, True, TradeRecord(float(V), int(N), float(Q), float(r)))
    return StepOutcome(t, False, None)


def ez_step(state: MarketState, a: float) -> StepOutcome:
    """Baseline step with constant activity ``a``; the trade record carries
    ``N = |r| = s``, the size of the cluster that traded."""
    a = _check_activity(a)
    t = state.t
    s = K.ez_step(state.rng, a, *state._kernel_args(), state.partition.ctr)
    if s > 0:
        return StepOutcome(t, True, TradeRecord(float(s), int(s), 0.0, float(s)))
    return StepOutcome(t, False, None)


def _check_activity(a) -> float:
    a = float(a)
    if not (0 < a <= 1):
        raise DomainError(f"activity a must lie in (0, 1], got {a!r}")
    return a


@dataclass
class EventStream:
    """Trade events from a contiguous block of steps ``[t_start, t_start + n_steps)``."""

    t: np.ndarray
    V: np.ndarray
    N: np.ndarray
    Q: np.ndarray
    r: np.ndarray
    t_start: int
    n_steps: int

    def __len__(self) -> int:
        return self.t.shape[0]

    @classmethod
    def empty(cls, t_start: int = 0) -> "EventStream":
        f = np.empty(0)
        return cls(np.empty(0, np.int64), f, np.empty(0, np.int64), f.copy(), f.copy(), t_start, 0)

    @classmethod
    def concatenate(cls, parts: list["EventStream"]) -> "EventStream":
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.t for p in parts]),
            np.concatenate([p.V for p in parts]),
            np.concatenate([p.N for p in parts]),
            np.concatenate([p.Q for p in parts]),
            np.concatenate([p.r for p in parts]),
            parts[0].t_start,
            sum(p.n_steps for p in parts),
        )

    def step_series(self) -> np.ndarray:
        """|r| per step, zero on merge-only steps."""
        x = np.zeros(self.n_steps)
        x[self.t - self.t_start] = np.abs(self.r)
        return x

    def trade_series(self) -> np.ndarray:
        """|r| per trade event."""
        return np.abs(self.r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (self.t_start == other.t_start and self.n_steps == other.n_steps
                and all(np.array_equal(getattr(self, f), getattr(other, f)) for f in "tVNQr"))


def run(state: MarketState, n_steps: int, record: bool = True,
        chunk_steps: int = CHUNK_STEPS) -> EventStream:
    """Advance ``n_steps`` steps and return the trade events (if ``record``)."""
    n_steps = int(n_steps)
    if n_steps < 0:
        raise DomainError("n_steps must be non-negative")
    p1, p2 = state.params.kernel.coefficients
    args = (state.params.kernel.code, p1, p2, state.params.A, _mode_code(state.params),
            *state._kernel_args(), state.vlast, state.partition.ctr, state.vl)
    t_start = state.t
    parts = []
    done = 0
    size = min(chunk_steps, max(n_steps, 1))
    bufs = (np.empty(size, np.int64), np.empty(size), np.empty(size, np.int64),
            np.empty(size), np.empty(size))
    while done < n_steps:
        n = min(chunk_steps, n_steps - done)
        k = K.run(state.rng, n, *args, *bufs)
        if record:
            parts.append(EventStream(*(b[:k].copy() for b in bufs), state.t - n, n))
        done += n
    if not record or not parts:
        out = EventStream.empty(t_start)
        out.n_steps = n_steps
        return out
    return EventStream.concatenate(parts)


def ez_run(state: MarketState, n_steps: int, a: float,
           chunk_steps: int = CHUNK_STEPS) -> tuple[np.ndarray, np.ndarray]:
    """Run the baseline dynamics; returns (step index, cluster size) per trade."""
    a = _check_activity(a)
    ts, ss = [], []
    done = 0
    size = min(chunk_steps, max(int(n_steps), 1))
    out_t = np.empty(size, np.int64)
    out_s = np.empty(size, np.int64)
    while done < n_steps:
        n = min(chunk_steps, n_steps - done)
        k = K.ez_run(state.rng, n, a, *state._kernel_args(), state.partition.ctr, out_t, out_s)
        ts.append(out_t[:k].copy())
        ss.append(out_s[:k].copy())
        done += n
    if not ts:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(ts), np.concatenate(ss)


# -- snapshots ---------------------------------------------------------------

def save_snapshot(state: MarketState, path) -> None:
    """Write a versioned checkpoint (``.npz``) that resumes bit-identically.

    Besides the per-agent (sign, last_trade_volume, cluster_id) triple the
    file stores the member-list links and cluster order, because those fix
    the order of later random draws.
    """
    p = state.partition
    meta = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "params": state.params.to_dict(),
        "t": state.t,
        "V_last": state.V_last,
        "rng_state": state.rng.bit_generator.state,
    }
    arrays = {name: getattr(p, name) for name in ClusterPartition.ARRAYS}
    arrays["vlast"] = state.vlast
    arrays["vl"] = state.vl
    arrays["agent_sign"] = state.signs()
    buf = io.BytesIO()
    np.savez(buf, meta=np.array(json.dumps(meta)), **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_snapshot(path) -> MarketState:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format") != SNAPSHOT_FORMAT:
            raise ConfigurationError(f"{path} is not a volherd snapshot")
        if meta.get("version") != SNAPSHOT_VERSION:
            raise ConfigurationError(f"unsupported snapshot version {meta.get('version')}")
        params = ModelParams.from_dict(meta["params"])
        partition = ClusterPartition.__new__(ClusterPartition)
        for name in ClusterPartition.ARRAYS:
            setattr(partition, name, data[name].copy())
        vlast = data["vlast"].copy()
        vl = data["vl"].copy()
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = meta["rng_state"]
    return MarketState(params, partition, vlast, rng, vl)
