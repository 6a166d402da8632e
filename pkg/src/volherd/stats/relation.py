"""Check of the approximate relation xi_r ~ xi_N ~ 2 xi_V."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..exceptions import DomainError


@dataclass(frozen=True)
class ExponentRelation:
    xi_V: float
    xi_N: float
    xi_r: float
    tolerance: float
    dev_N_2V: float
    dev_r_N: float
    passed: bool

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


def exponent_relation_report(xi_V: float, xi_N: float, xi_r: float,
                             tolerance: float = 0.5) -> ExponentRelation:
    if not all(math.isfinite(v) for v in (xi_V, xi_N, xi_r)):
        raise DomainError("exponents must be finite")
    dev_N = abs(xi_N - 2.0 * xi_V)
    dev_r = abs(xi_r - xi_N)
    return ExponentRelation(xi_V, xi_N, xi_r, tolerance, dev_N, dev_r,
                            dev_N <= tolerance and dev_r <= tolerance)
