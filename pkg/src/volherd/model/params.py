"""Model parameters, trading-probability kernels and the price-impact rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..exceptions import ConfigurationError, DomainError

RNG_ALGORITHM_ID = "numpy.random.PCG64"

# Kernel codes understood by the compiled dynamics.
RATIONAL = 0
EXPONENTIAL = 1

SECOND_CLUSTER_MODES = ("uniform", "size_biased")


@dataclass(frozen=True)
class RationalKernel:
    """a = 1 / (1 + b * V_prev / v_last)."""

    b: float

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ConfigurationError(f"b must be a positive finite number, got {self.b!r}")

    name = "rational"
    code = RATIONAL

    @property
    def coefficients(self) -> tuple[float, float]:
        return float(self.b), 0.0

    def probability(self, V_prev, v_last):
        return trading_probability(self, V_prev, v_last)

    def to_dict(self) -> dict:
        return {"name": self.name, "b": self.b}


@dataclass(frozen=True)
class ExponentialKernel:
    """a = 1 - c * exp(-d * V_prev / v_last), with 0 < c <= 1 and d > 0."""

    c: float
    d: float

    def __post_init__(self):
        if not (0 < self.c <= 1):
            raise ConfigurationError(f"c must lie in (0, 1], got {self.c!r}")
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ConfigurationError(f"d must be a positive finite number, got {self.d!r}")

    name = "exponential"
    code = EXPONENTIAL

    @property
    def coefficients(self) -> tuple[float, float]:
        return float(self.c), float(self.d)

    def probability(self, V_prev, v_last):
        return trading_probability(self, V_prev, v_last)

    def to_dict(self) -> dict:
        return {"name": self.name, "c": self.c, "d": self.d}


Kernel = Union[RationalKernel, ExponentialKernel]


def kernel_from_dict(data: dict) -> Kernel:
    name = data.get("name", "rational")
    if name == "rational":
        return RationalKernel(float(data["b"]))
    if name == "exponential":
        return ExponentialKernel(float(data["c"]), float(data["d"]))
    raise ConfigurationError(f"unknown kernel {name!r}")


def trading_probability(kernel: Kernel, V_prev, v_last):
    """Probability that the selected agent's cluster trades.

    Accepts scalars or arrays. The exponential form is evaluated as
    ``(1 - c) - c * expm1(-d * x)`` so that small ``d * x`` does not cancel
    to zero.
    """
    V_prev = np.asarray(V_prev, dtype=float)
    v_last = np.asarray(v_last, dtype=float)
    if np.any(~(V_prev > 0)) or np.any(~(v_last > 0)):
        raise DomainError("V_prev and v_last must be positive")
    ratio = V_prev / v_last
    if kernel.code == RATIONAL:
        out = 1.0 / (1.0 + kernel.b * ratio)
    else:
        out = (1.0 - kernel.c) - kernel.c * np.expm1(-kernel.d * ratio)
    return out[()] if out.ndim == 0 else out


def price_return(Q, N, A: float):
    """Sign(Q) * sqrt|Q| / (sqrt|Q| + A) * sqrt(N); zero when Q == 0."""
    if not A > 0:
        raise DomainError(f"A must be positive, got {A!r}")
    Q = np.asarray(Q, dtype=float)
    N = np.asarray(N, dtype=float)
    if np.any(N < 1):
        raise DomainError("N must be >= 1")
    sq = np.sqrt(np.abs(Q))
    out = np.sign(Q) * sq / (sq + A) * np.sqrt(N)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ModelParams:
    """All tunable constants of one simulation.

    ``second_cluster`` picks how the partner cluster of a trade is drawn:
    ``"uniform"`` over cluster ids (default) or ``"size_biased"`` through a
    uniformly chosen agent, kept for sensitivity checks.
    """

    M: int
    kernel: Kernel = field(default_factory=lambda: RationalKernel(0.45))
    A: float = 50.0
    seed: int = 0
    second_cluster: str = "uniform"
    rng_algorithm_id: str = RNG_ALGORITHM_ID

    def __post_init__(self):
        if isinstance(self.M, bool) or not isinstance(self.M, (int, np.integer)):
            raise ConfigurationError(f"M must be an integer, got {self.M!r}")
        if self.M < 2:
            raise ConfigurationError(f"M must be >= 2, got {self.M}")
        if not isinstance(self.kernel, (RationalKernel, ExponentialKernel)):
            raise ConfigurationError(f"unsupported kernel {self.kernel!r}")
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ConfigurationError(f"A must be a positive finite number, got {self.A!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.second_cluster not in SECOND_CLUSTER_MODES:
            raise ConfigurationError(
                f"second_cluster must be one of {SECOND_CLUSTER_MODES}, got {self.second_cluster!r}"
            )
        if self.rng_algorithm_id != RNG_ALGORITHM_ID:
            raise ConfigurationError(f"unsupported RNG algorithm {self.rng_algorithm_id!r}")

    @classmethod
    def rational(cls, M: int, b: float, **kw) -> "ModelParams":
        return cls(M=M, kernel=RationalKernel(b), **kw)

    @classmethod
    def exponential(cls, M: int, c: float, d: float, **kw) -> "ModelParams":
        return cls(M=M, kernel=ExponentialKernel(c, d), **kw)

    def to_dict(self) -> dict:
        return {
            "M": int(self.M),
            "kernel": self.kernel.to_dict(),
            "A": float(self.A),
            "seed": int(self.seed),
            "second_cluster": self.second_cluster,
            "rng_algorithm_id": self.rng_algorithm_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        return cls(
            M=int(data["M"]),
            kernel=kernel_from_dict(data["kernel"]),
            A=float(data.get("A", 50.0)),
            seed=int(data.get("seed", 0)),
            second_cluster=data.get("second_cluster", "uniform"),
            rng_algorithm_id=data.get("rng_algorithm_id", RNG_ALGORITHM_ID),
        )
