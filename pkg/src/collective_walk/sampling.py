"""Seeded multinomial sampling of measurement outcomes."""

from __future__ import annotations

import dataclasses

import numpy as np

from .povm import Povm, outcome_probabilities


@dataclasses.dataclass(frozen=True)
class RngStream:
    """Independent random stream identified by ``(seed, stream)``.

    ``stream`` is a tuple of non-negative integers (e.g. ``(N, repetition)``).
    Each call to :meth:`generator` returns a fresh Philox generator keyed by
    the pair, so results never depend on the order in which streams are used.
    """

    seed: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        stream = (self.stream,) if isinstance(self.stream, (int, np.integer)) else self.stream
        object.__setattr__(self, "stream", tuple(int(s) for s in stream))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))

    def child(self, *indices: int) -> "RngStream":
        return RngStream(self.seed, self.stream + tuple(indices))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclasses.dataclass(frozen=True)
class MeasurementRecord:
    counts: np.ndarray
    label: str = ""

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ValueError("counts must be a vector of non-negative integers")
        if counts.sum() < 1:
            raise ValueError("a record needs at least one count")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total


def multinomial_sample(probabilities, n: int, rng) -> MeasurementRecord:
    """Draw ``n`` categorical outcomes by inverse-CDF lookup and count them."""
    if n < 1:
        raise ValueError("need at least one shot")
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    cdf = np.cumsum(p / p.sum())
    # pin the tail to exactly 1 from the last possible outcome onwards so that
    # zero-probability trailing outcomes can never be drawn
    cdf[np.flatnonzero(p)[-1]:] = 1.0
    u = as_generator(rng).random(n)
    idx = np.searchsorted(cdf, u, side="right")
    return MeasurementRecord(np.bincount(idx, minlength=len(p)))


def simulate_measurement(state: np.ndarray, povm: Povm, n: int, rng) -> MeasurementRecord:
    rec = multinomial_sample(outcome_probabilities(state, povm), n, rng)
    return MeasurementRecord(rec.counts, ",".join(povm.labels))
