"""Dominance relations, Pareto flags, layer counts and box statistics.

A point ``a`` dominates ``b`` when ``a[k] >= b[k]`` for every coordinate.
``counts[i]`` is the number of other sample points dominated by point ``i``;
a point is Pareto (minimal) when that count is zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError

STRATEGIES = ("naive", "sum-pruned")


@dataclass(frozen=True)
class SampleMatrix:
    """``n`` points of ``[0, 1]^d`` as an ``(n, d)`` float array."""

    coords: np.ndarray
    master_seed: Optional[int] = None
    replicate_index: Optional[int] = None

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 2:
            raise InvalidArgumentError(f"coords must be 2-d, got shape {coords.shape}")
        if coords.size and (coords.min() < 0.0 or coords.max() > 1.0):
            raise InvalidArgumentError("coordinates must lie in [0, 1]")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def truncate(self, d: int) -> "SampleMatrix":
        """Keep the first ``d`` coordinates of every row."""
        if not 1 <= d <= self.d:
            raise InvalidArgumentError(f"cannot truncate dimension {self.d} to {d}")
        return SampleMatrix(self.coords[:, :d], self.master_seed, self.replicate_index)


@dataclass(frozen=True)
class ProjectionSpec:
    """Selected coordinates ``k_1 < ... < k_m``, 1-based."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(k) for k in self.indices)
        if not idx:
            raise InvalidArgumentError("projection needs at least one index")
        if idx[0] < 1:
            raise InvalidArgumentError(f"projection indices are 1-based, got {idx[0]}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidArgumentError(f"projection indices must increase strictly: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def m(self) -> int:
        return len(self.indices)

    def apply(self, coords: np.ndarray) -> np.ndarray:
        if self.indices[-1] > coords.shape[1]:
            raise InvalidArgumentError(
                f"projection index {self.indices[-1]} exceeds dimension {coords.shape[1]}"
            )
        return coords[:, [k - 1 for k in self.indices]]


@dataclass(frozen=True)
class BoxRegion:
    """Axis-aligned closed box ``prod_k [a_k, b_k]`` inside ``[0, 1]^m``."""

    bounds: tuple

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not b:
            raise InvalidArgumentError("box needs at least one interval")
        for lo, hi in b:
            if not (0.0 <= lo < hi <= 1.0):
                raise InvalidArgumentError(f"invalid interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def unit(cls, m: int = 1) -> "BoxRegion":
        return cls(((0.0, 1.0),) * m)

    @property
    def m(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lower) & (points <= self.upper), axis=1)


@dataclass(frozen=True)
class DominanceSummary:
    counts: np.ndarray

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def pareto(self) -> np.ndarray:
        return self.counts == 0

    @property
    def K(self) -> int:
        return int(np.count_nonzero(self.counts == 0))

    @property
    def nonpareto(self) -> int:
        return self.n - self.K

    def layer(self, r: int) -> int:
        """Number of points dominating exactly ``r`` others (``r = 0`` gives K)."""
        return int(np.count_nonzero(self.counts == r))

    @property
    def layers(self) -> dict:
        return layer_histogram(self)


@dataclass(frozen=True)
class BoxStatistics:
    S: int
    T: int
    projected_points: np.ndarray  # shape (T, m)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a[k] >= b[k]`` for every coordinate ``k``."""
    if len(a) != len(b):
        raise InvalidArgumentError(f"dimension mismatch: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if x < y:
            return False
    return True


def dominance_counts(sample, strategy: str = "sum-pruned") -> DominanceSummary:
    """Per-point dominance counts.

    ``"naive"`` tests every ordered pair.  ``"sum-pruned"`` sorts rows by
    coordinate sum and only tests candidates whose sum does not exceed that
    of the dominating row, with a coarse bit-signature prefilter in front of
    the coordinate loop.  Both return identical counts.
    """
    coords = sample.coords if isinstance(sample, SampleMatrix) else SampleMatrix(sample).coords
    if strategy == "naive":
        counts = _kernels.counts_naive(coords)
    elif strategy == "sum-pruned":
        counts = _kernels.counts_sum_pruned(coords)
    else:
        raise InvalidArgumentError(f"unknown strategy {strategy!r}; use one of {STRATEGIES}")
    return DominanceSummary(counts)


def batch_dominance_counts(stack: np.ndarray) -> np.ndarray:
    """Counts for a stack of samples shaped ``(reps, n, d)``; returns ``(reps, n)``."""
    stack = np.ascontiguousarray(stack, dtype=np.float64)
    if stack.ndim != 3:
        raise InvalidArgumentError(f"expected a 3-d stack, got shape {stack.shape}")
    return _kernels.counts_batch(stack)


def layer_histogram(summary) -> dict:
    """Map ``r -> K^(r)`` for ``r = 0..max(counts)``; the ``0`` entry is K."""
    counts = summary.counts if isinstance(summary, DominanceSummary) else np.asarray(summary)
    if counts.size == 0:
        return {0: 0}
    hist = np.bincount(counts)
    return {r: int(v) for r, v in enumerate(hist)}


def box_statistics(sample, proj: ProjectionSpec, box: BoxRegion,
                   summary: Optional[DominanceSummary] = None) -> BoxStatistics:
    """Weighted (S) and unweighted (T) counts of non-Pareto points projecting into ``box``."""
    if box.m != proj.m:
        raise InvalidArgumentError(f"box has dimension {box.m}, projection has {proj.m}")
    coords = sample.coords if isinstance(sample, SampleMatrix) else np.asarray(sample, float)
    if proj.indices[-1] > coords.shape[1]:
        raise InvalidArgumentError(
            f"projection index {proj.indices[-1]} exceeds dimension {coords.shape[1]}"
        )
    if summary is None:
        summary = dominance_counts(sample)
    counts = summary.counts
    if coords.shape[0] == 0:
        return BoxStatistics(0, 0, np.empty((0, proj.m)))
    projected = proj.apply(coords)
    inside = box.contains(projected)
    hit = inside & (counts >= 1)
    S = int(counts[inside].sum())
    T = int(np.count_nonzero(hit))
    return BoxStatistics(S, T, projected[hit])
