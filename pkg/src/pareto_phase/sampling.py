"""Deterministic uniform samples keyed by (master_seed, replicate_index).

Each replicate gets its own Philox counter-based stream.  The Philox key is
derived by hashing ``(master_seed, replicate_index)`` through numpy's
``SeedSequence`` (entropy = master seed, spawn key = replicate index), so a
replicate's draws never depend on which worker produced them or in which
order.

Coordinates are drawn coordinate-major: all ``n`` values of coordinate 1,
then all of coordinate 2, and so on.  Under this convention the first ``d``
columns of a ``d' > d`` sample are exactly the ``d``-dimensional sample from
the same stream, which is the dimension coupling used by sweeps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .dominance import SampleMatrix
from .errors import InvalidArgumentError, ResourceLimitError

# Upper bound on variates held in memory at once (8 bytes each).
MAX_VARIATES = 1 << 27

# Inversion is used up to this intensity, numpy's PTRS sampler above it.
POISSON_INVERSION_MAX = 30.0

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class StreamSpec:
    master_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if self.replicate_index < 0:
            raise InvalidArgumentError("replicate_index must be non-negative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed) & _SEED_MASK,
            spawn_key=(int(self.replicate_index),),
        )
        return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class CoupledSample:
    """One coordinate pool serving every dimension in ``dims``."""

    coords: np.ndarray
    dims: tuple
    master_seed: int | None = None
    replicate_index: int | None = None

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def at(self, d: int) -> SampleMatrix:
        if d not in self.dims:
            raise InvalidArgumentError(f"dimension {d} not among {self.dims}")
        return SampleMatrix(self.coords[:, :d], self.master_seed, self.replicate_index)


def _check_budget(count: int, budget: int = MAX_VARIATES) -> None:
    if count > budget:
        raise ResourceLimitError(f"{count} variates exceed the budget of {budget}")


def draw_coordinates(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n * d`` uniforms in [0, 1), coordinate-major, returned as an ``(n, d)`` array."""
    return np.ascontiguousarray(gen.random((d, n)).T)


def sample_uniform(n: int, d: int, stream: StreamSpec, budget: int = MAX_VARIATES) -> SampleMatrix:
    if n < 1 or d < 1:
        raise InvalidArgumentError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    _check_budget(n * d, budget)
    coords = draw_coordinates(stream.generator(), n, d)
    return SampleMatrix(coords, stream.master_seed, stream.replicate_index)


def coupled_samples(n: int, dims: Sequence[int], stream: StreamSpec,
                    budget: int = MAX_VARIATES) -> CoupledSample:
    dims = tuple(int(x) for x in dims)
    if not dims:
        raise InvalidArgumentError("dims must not be empty")
    if dims[0] < 1 or any(b <= a for a, b in zip(dims, dims[1:])):
        raise InvalidArgumentError(f"dims must be positive and strictly increasing: {dims}")
    if n < 1:
        raise InvalidArgumentError(f"need n >= 1, got {n}")
    _check_budget(n * dims[-1], budget)
    coords = draw_coordinates(stream.generator(), n, dims[-1])
    coords.setflags(write=False)
    return CoupledSample(coords, dims, stream.master_seed, stream.replicate_index)


def poisson_variate(gen: np.random.Generator, lam: float) -> int:
    """Poisson(lam) by sequential inversion for small lam, numpy's PTRS otherwise."""
    if lam <= POISSON_INVERSION_MAX:
        u = gen.random()
        k = 0
        p = math.exp(-lam)
        cdf = p
        while u > cdf:
            k += 1
            p *= lam / k
            if p == 0.0:
                break
            cdf += p
        return k
    return int(gen.poisson(lam))


def poissonized_sample(lam: float, d: int, stream: StreamSpec,
                       budget: int = MAX_VARIATES) -> SampleMatrix:
    """Poisson(lam) many uniform points; the count is drawn before the points."""
    if not lam > 0:
        raise InvalidArgumentError(f"intensity must be positive, got {lam}")
    if d < 1:
        raise InvalidArgumentError(f"need d >= 1, got {d}")
    gen = stream.generator()
    n = poisson_variate(gen, lam)
    _check_budget(n * d, budget)
    coords = draw_coordinates(gen, n, d) if n else np.empty((0, d))
    return SampleMatrix(coords, stream.master_seed, stream.replicate_index)


def sample_batch(reps: int, n: int, d: int, stream: StreamSpec,
                 chunk: int = 4096) -> Iterator[np.ndarray]:
    """Yield stacks ``(<=chunk, n, d)`` of independent samples from one stream.

    Used by brute-force oracle checks where one generator per replicate
    would dominate the run time.
    """
    if reps < 1 or n < 1 or d < 1:
        raise InvalidArgumentError("reps, n and d must be positive")
    chunk = max(1, min(chunk, MAX_VARIATES // (n * d)))
    gen = stream.generator()
    done = 0
    while done < reps:
        size = min(chunk, reps - done)
        yield np.ascontiguousarray(gen.random((size, d, n)).transpose(0, 2, 1))
        done += size
