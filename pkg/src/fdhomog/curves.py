"""Discretized functional samples and the numeric primitives depths rely on.

A :class:`FunctionalSample` holds ``n`` curves observed on one shared
:class:`Grid` of ``m`` points.  Curves are plain 1-D float arrays aligned
index-for-index with the grid; the sample stores them as an ``(n, m)``
read-only matrix.  Integrals are trapezoid sums on the observation grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, DegenerateInputError

__all__ = [
    "Grid",
    "FunctionalSample",
    "as_curve",
    "trapezoid_weights",
    "trapezoid_integral",
    "l2_distance",
    "pairwise_l2",
    "finite_difference",
    "pointwise_ranks",
    "order_statistic_rank",
    "order_statistic",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing observation instants ``t_1 < ... < t_m`` with ``m >= 2``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise DegenerateInputError("a grid needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise ContractError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ContractError("grid points must be strictly increasing")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def uniform(cls, m: int, start: float = 0.0, stop: float = 1.0) -> "Grid":
        """``m`` equidistant points from ``start`` to ``stop``, endpoints included."""
        return cls(np.linspace(start, stop, m))

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.array_equal(self.points, other.points)
        )

    def __hash__(self):
        return hash(self.points.tobytes())

    @property
    def length(self) -> float:
        """Total length ``t_m - t_1`` of the observation interval."""
        return float(self.points[-1] - self.points[0])

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """An ordered sample of curves on a common grid.

    Parameters
    ----------
    grid : Grid
        Shared observation grid.
    values : array_like, shape (n, m)
        Row ``i`` is curve ``i``.  Order is significant.
    labels : sequence of str, optional
        Per-curve identifiers, length ``n``.
    """

    grid: Grid
    values: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        if not isinstance(self.grid, Grid):
            object.__setattr__(self, "grid", Grid(self.grid))
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise DegenerateInputError("a sample needs at least one curve")
        if vals.shape[1] != len(self.grid):
            raise ContractError(
                f"curves have {vals.shape[1]} values but the grid has {len(self.grid)} points"
            )
        if not np.all(np.isfinite(vals)):
            raise ContractError("curve values must be finite")
        object.__setattr__(self, "values", _frozen(vals))
        if self.labels is not None:
            labels = tuple(str(lab) for lab in self.labels)
            if len(labels) != vals.shape[0]:
                raise ContractError("labels must have one entry per curve")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FunctionalSample):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.labels == other.labels
            and np.array_equal(self.values, other.values)
        )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def curve(self, i: int) -> np.ndarray:
        return self.values[i]

    def take(self, indices) -> "FunctionalSample":
        """Sub-sample (with repetition allowed) in the given index order."""
        idx = np.asarray(indices, dtype=int)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return FunctionalSample(self.grid, self.values[idx], labels)

    def append(self, curve) -> "FunctionalSample":
        """Return a new sample with ``curve`` added as the last member."""
        g = as_curve(curve, self.grid)
        return FunctionalSample(self.grid, np.vstack([self.values, g]))

    def concat(self, other: "FunctionalSample") -> "FunctionalSample":
        check_same_grid(self, other)
        labels = None
        if self.labels is not None and other.labels is not None:
            labels = self.labels + other.labels
        return FunctionalSample(self.grid, np.vstack([self.values, other.values]), labels)

    def map_values(self, func) -> "FunctionalSample":
        return FunctionalSample(self.grid, func(self.values), self.labels)


def check_same_grid(*samples: FunctionalSample) -> None:
    first = samples[0].grid
    for s in samples[1:]:
        if s.grid != first:
            raise ContractError("samples are observed on different grids")


def as_curve(values, grid: Grid) -> np.ndarray:
    """Validate a single curve against ``grid`` and return it as a float array."""
    g = np.asarray(values, dtype=float)
    if g.ndim != 1 or g.size != len(grid):
        raise ContractError(
            f"curve of shape {g.shape} does not conform to a grid of {len(grid)} points"
        )
    if not np.all(np.isfinite(g)):
        raise ContractError("curve values must be finite")
    return g


def trapezoid_weights(grid: Grid) -> np.ndarray:
    """Weights ``w`` with ``trapezoid_integral(v, grid) == w @ v`` up to rounding."""
    dt = np.diff(grid.points)
    w = np.zeros(len(grid))
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def trapezoid_integral(values, grid: Grid) -> float | np.ndarray:
    """Trapezoid rule along the last axis of ``values``.

    A 1-D input returns a float; stacked curves return one integral per row.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[-1] != len(grid):
        raise ContractError(
            f"got {v.shape[-1]} values for a grid of {len(grid)} points"
        )
    dt = np.diff(grid.points)
    out = np.sum(dt * (v[..., 1:] + v[..., :-1]) / 2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def l2_distance(a, b, grid: Grid) -> float:
    """L2 distance between two curves, integrated with the trapezoid rule."""
    a = as_curve(a, grid)
    b = as_curve(b, grid)
    return math.sqrt(max(trapezoid_integral((a - b) ** 2, grid), 0.0))


def pairwise_l2(sample: FunctionalSample) -> np.ndarray:
    """Symmetric ``(n, n)`` matrix of L2 distances between the curves of ``sample``."""
    x = sample.values
    diff2 = (x[:, None, :] - x[None, :, :]) ** 2
    d2 = trapezoid_integral(diff2, sample.grid)
    return np.sqrt(np.maximum(d2, 0.0))


def finite_difference(sample: FunctionalSample, order: int = 1) -> FunctionalSample:
    """Iterated divided differences of every curve.

    Each pass replaces ``m`` values by ``m - 1`` slopes
    ``(v[k+1] - v[k]) / (t[k+1] - t[k])`` placed at the segment midpoints.
    """
    if order < 1:
        raise ContractError("derivative order must be a positive integer")
    if sample.m <= order:
        raise DegenerateInputError(
            f"cannot take {order} differences of curves with {sample.m} points"
        )
    t = sample.grid.points
    v = sample.values
    for _ in range(order):
        v = np.diff(v, axis=1) / np.diff(t)
        t = (t[1:] + t[:-1]) / 2
    return FunctionalSample(Grid(t), v, sample.labels)


def pointwise_ranks(sample: FunctionalSample) -> np.ndarray:
    """Entry ``(i, k)`` counts curves ``j`` with ``x_j(t_k) <= x_i(t_k)``."""
    x = sample.values
    srt = np.sort(x, axis=0)
    ranks = np.empty(x.shape, dtype=int)
    for k in range(x.shape[1]):
        ranks[:, k] = np.searchsorted(srt[:, k], x[:, k], side="right")
    return ranks


def order_statistic_rank(q: float, count: int) -> int:
    """1-based rank ``ceil(q * count)`` clamped to ``[1, count]``.

    A relative slack of 1e-9 absorbs binary rounding such as ``0.15 * 20``.
    """
    if count < 1:
        raise DegenerateInputError("empty set has no order statistics")
    r = math.ceil(q * count * (1 - 1e-9))
    return min(max(r, 1), count)


def order_statistic(values, q: float) -> float:
    """The ``ceil(q * count)``-th smallest entry of ``values``."""
    v = np.asarray(values, dtype=float).ravel()
    r = order_statistic_rank(q, v.size)
    return float(np.partition(v, r - 1)[r - 1])
