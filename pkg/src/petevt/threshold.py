"""Threshold diagnostics, exceedance extraction and runs declustering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import EstimationError, ParameterError

__all__ = [
    "MrlPoint",
    "Cluster",
    "ClusterSet",
    "default_mrl_grid",
    "mrl_curve",
    "extract_excesses",
    "decluster",
    "runs_theta",
]


@dataclass(frozen=True)
class MrlPoint:
    u: float
    mean_excess: Optional[float]
    n_excess: int
    ci_halfwidth: float


class Cluster(NamedTuple):
    start: int
    end: int
    peak_index: int
    peak_value: float
    size: int


@dataclass(frozen=True)
class ClusterSet:
    """Clusters of exceedances of ``threshold`` found with run length ``kappa``."""

    clusters: tuple
    threshold: float
    kappa: int

    def __len__(self):
        return len(self.clusters)

    @property
    def n_exceedances(self) -> int:
        return sum(c.size for c in self.clusters)

    @property
    def peak_indices(self) -> np.ndarray:
        return np.array([c.peak_index for c in self.clusters], dtype=np.int64)

    @property
    def peak_values(self) -> np.ndarray:
        return np.array([c.peak_value for c in self.clusters], dtype=float)

    @property
    def peak_excesses(self) -> np.ndarray:
        return self.peak_values - self.threshold


def default_mrl_grid(data, n: int = 200) -> np.ndarray:
    """Equally spaced thresholds from the 50th to the 99th sample percentile."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        return np.empty(0)
    lo, hi = np.percentile(data, [50.0, 99.0])
    return np.linspace(lo, hi, n)


def mrl_curve(data, grid: Optional[Sequence[float]] = None) -> list:
    """Mean residual life curve: sample mean excess over each threshold.

    The band half-width is the normal approximation ``1.96 * sd / sqrt(n)``.
    Thresholds above the sample maximum give a point with no excesses and
    ``mean_excess=None``.
    """
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        return []
    grid = default_mrl_grid(data) if grid is None else np.asarray(grid, dtype=float)
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ParameterError("MRL grid must be strictly increasing")
    points = []
    for u in grid:
        exc = data[data > u] - u
        n = exc.size
        if n == 0:
            points.append(MrlPoint(float(u), None, 0, 0.0))
            continue
        sd = float(np.std(exc, ddof=1)) if n > 1 else 0.0
        points.append(MrlPoint(float(u), float(exc.mean()), n, 1.96 * sd / np.sqrt(n)))
    return points


def extract_excesses(data, u: float):
    """Indices of values above ``u`` and their excesses, in series order."""
    data = np.asarray(data, dtype=float)
    idx = np.flatnonzero(data > u)
    return idx, data[idx] - u


def decluster(data, u: float, kappa: int, breaks=None) -> ClusterSet:
    """Runs declustering.

    A cluster starts at an exceedance and ends once ``kappa`` consecutive
    values fall at or below ``u``.  ``breaks`` (per-observation flags marking
    a gap immediately before the observation) end a cluster unconditionally.
    Peak ties go to the earliest index.
    """
    if int(kappa) != kappa or kappa < 1:
        raise ParameterError(f"run length kappa must be a positive integer, got {kappa}")
    kappa = int(kappa)
    data = np.asarray(data, dtype=float)
    idx = np.flatnonzero(data > u)
    if idx.size == 0:
        return ClusterSet((), float(u), kappa)
    new = np.ones(idx.size, dtype=bool)
    new[1:] = np.diff(idx) - 1 >= kappa
    if breaks is not None:
        cb = np.cumsum(np.asarray(breaks, dtype=bool))
        new[1:] |= cb[idx[1:]] > cb[idx[:-1]]
    starts = np.flatnonzero(new)
    ends = np.append(starts[1:], idx.size)
    vals = data[idx]
    clusters = []
    for a, b in zip(starts, ends):
        k = a + int(np.argmax(vals[a:b]))
        clusters.append(Cluster(int(idx[a]), int(idx[b - 1]), int(idx[k]), float(vals[k]), int(b - a)))
    return ClusterSet(tuple(clusters), float(u), kappa)


def runs_theta(data, u: float, kappa: int, breaks=None) -> float:
    """Runs estimate of the extremal index: clusters per exceedance."""
    cs = decluster(data, u, kappa, breaks)
    if cs.n_exceedances == 0:
        raise EstimationError(f"no exceedances of {u}; extremal index undefined")
    return len(cs) / cs.n_exceedances
