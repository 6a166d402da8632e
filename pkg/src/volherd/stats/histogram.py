"""Logarithmically binned empirical densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .._validation import check_samples
from ..exceptions import DomainError

MIN_SAMPLES = 100


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int
    bins_per_decade: int
    counts: Optional[np.ndarray] = None

    @property
    def centers(self) -> np.ndarray:
        """Geometric bin centers."""
        return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def occupied(self) -> np.ndarray:
        return self.densities > 0

    def total_mass(self) -> float:
        return float(np.sum(self.densities * self.widths))

    def to_text(self, delimiter: str = "\t") -> str:
        """Occupied bins as ``center<TAB>density`` lines."""
        mask = self.occupied
        lines = [f"# x{delimiter}density  (bins_per_decade={self.bins_per_decade}, "
                 f"samples={self.sample_count})"]
        lines += [f"{x:.17g}{delimiter}{y:.17g}"
                  for x, y in zip(self.centers[mask], self.densities[mask])]
        return "\n".join(lines) + "\n"


def log_bin_edges(lo: float, hi: float, bins_per_decade: int) -> np.ndarray:
    """Edges ``10**(k / bins_per_decade)`` covering ``[lo, hi]`` with ``hi`` strictly inside."""
    k0 = math.floor(math.log10(lo) * bins_per_decade)
    k1 = math.floor(math.log10(hi) * bins_per_decade) + 1
    # Guard against log10 rounding at exact powers.
    while 10.0 ** (k0 / bins_per_decade) > lo:
        k0 -= 1
    while 10.0 ** (k1 / bins_per_decade) <= hi:
        k1 += 1
    return 10.0 ** (np.arange(k0, k1 + 1) / bins_per_decade)


def log_binned_pdf(samples, bins_per_decade: int = 20) -> Histogram:
    """Empirical PDF on a decade-aligned logarithmic grid.

    Densities are counts divided by ``n * bin_width``, so the piecewise
    constant density integrates to one; empty bins get density 0.
    """
    if int(bins_per_decade) != bins_per_decade or bins_per_decade < 1:
        raise DomainError("bins_per_decade must be a positive integer")
    bins_per_decade = int(bins_per_decade)
    x = check_samples(samples, positive=True, min_samples=MIN_SAMPLES)
    edges = log_bin_edges(float(x.min()), float(x.max()), bins_per_decade)
    counts = np.bincount(np.searchsorted(edges, x, side="right") - 1,
                         minlength=edges.size - 1)[: edges.size - 1]
    densities = counts / (x.size * np.diff(edges))
    return Histogram(edges, densities, int(x.size), bins_per_decade, counts)
