"""Seeded random streams and finite-population sampling primitives.

Randomness is organized around explicit streams: a (master_seed, stream_id)
pair keys a Philox counter-based generator, so distinct stream ids give
statistically independent streams with no shared state and the same pair
reproduces the same draws on every run, platform, and thread count.
"""

from dataclasses import dataclass, field

import numpy as np

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class RngStream:
    """A deterministic random stream keyed by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int
    generator: np.random.Generator = field(repr=False, compare=False)


def make_rng(master_seed: int, stream_id: int) -> RngStream:
    """Create the stream keyed by (master_seed, stream_id).

    The two 64-bit words form the Philox key, so any two distinct
    (master_seed, stream_id) pairs yield unrelated streams.
    """
    for name, value in (("master_seed", master_seed), ("stream_id", stream_id)):
        if not isinstance(value, (int, np.integer)) or not 0 <= int(value) <= _UINT64_MAX:
            raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
    key = np.array([master_seed, stream_id], dtype=np.uint64)
    return RngStream(int(master_seed), int(stream_id), np.random.Generator(np.random.Philox(key=key)))


@dataclass(frozen=True)
class PublicationRecord:
    """One publication: field-normalized citation score and top-10% flag."""

    ncs: float
    top10: bool

    def __post_init__(self):
        if not np.isfinite(self.ncs) or self.ncs < 0:
            raise ValueError(f"ncs must be finite and >= 0, got {self.ncs!r}")


class Population:
    """An immutable finite population of publication records.

    Stores the per-record citation scores and top-10% flags as parallel
    read-only arrays; safe to share across threads and processes.
    """

    __slots__ = ("ncs", "top10")

    def __init__(self, ncs, top10):
        ncs = np.array(ncs, dtype=np.float64)
        top10 = np.array(top10, dtype=bool)
        if ncs.ndim != 1 or top10.ndim != 1 or ncs.size != top10.size:
            raise ValueError("ncs and top10 must be 1-d arrays of equal length")
        if ncs.size < 1:
            raise ValueError("population must contain at least one record")
        if not np.all(np.isfinite(ncs)) or np.any(ncs < 0):
            raise ValueError("all ncs values must be finite and >= 0")
        ncs.setflags(write=False)
        top10.setflags(write=False)
        self.ncs = ncs
        self.top10 = top10

    @classmethod
    def from_records(cls, records) -> "Population":
        records = list(records)
        return cls([r.ncs for r in records], [r.top10 for r in records])

    @property
    def size(self) -> int:
        return int(self.ncs.size)

    def __len__(self) -> int:
        return self.size

    def records(self) -> tuple[PublicationRecord, ...]:
        return tuple(PublicationRecord(float(s), bool(t)) for s, t in zip(self.ncs, self.top10))


class Sample:
    """A without-replacement sample of a :class:`Population`.

    ``indices`` are the distinct population positions (reported in
    population order), ``ncs``/``top10`` the corresponding record values,
    and ``f = n / population_size`` the sampling fraction.
    """

    __slots__ = ("indices", "ncs", "top10", "population_size")

    def __init__(self, indices, ncs, top10, population_size: int):
        indices = np.array(indices, dtype=np.int64)
        ncs = np.array(ncs, dtype=np.float64)
        top10 = np.array(top10, dtype=bool)
        n = indices.size
        if n < 1:
            raise ValueError("sample must contain at least one record")
        if ncs.size != n or top10.size != n:
            raise ValueError("indices, ncs and top10 must have equal length")
        if n > population_size:
            raise ValueError(f"sample size {n} exceeds population size {population_size}")
        if np.unique(indices).size != n:
            raise ValueError("sample indices must be pairwise distinct")
        if indices.min() < 0 or indices.max() >= population_size:
            raise ValueError("sample indices out of population range")
        for arr in (indices, ncs, top10):
            arr.setflags(write=False)
        self.indices = indices
        self.ncs = ncs
        self.top10 = top10
        self.population_size = int(population_size)

    @property
    def n(self) -> int:
        return int(self.indices.size)

    @property
    def f(self) -> float:
        return self.n / self.population_size

    def records(self) -> tuple[PublicationRecord, ...]:
        return tuple(PublicationRecord(float(s), bool(t)) for s, t in zip(self.ncs, self.top10))


def _partial_permutation(gen: np.random.Generator, n_take: int, pool_size: int) -> np.ndarray:
    """First ``n_take`` entries of a uniform permutation of range(pool_size).

    Sparse partial Fisher-Yates: only the touched positions are stored, so
    extra space is O(n_take) regardless of pool size.
    """
    js = gen.integers(np.arange(n_take, dtype=np.int64), pool_size)
    state: dict[int, int] = {}
    picked = np.empty(n_take, dtype=np.int64)
    for i in range(n_take):
        j = int(js[i])
        vi = state.get(i, i)
        vj = state.get(j, j)
        picked[i] = vj
        state[j] = vi
    return picked


def srswor(pop: Population, n: int, rng: RngStream) -> Sample:
    """Simple random sample without replacement: every size-n subset equally likely.

    Indices are reported sorted in population order (the draw is uniform
    over subsets, so the ordering carries no information; keeping
    population order makes the census case n = N reproduce the population
    arrays bit for bit).
    """
    N = pop.size
    if not 1 <= n <= N:
        raise ValueError(f"sample size must satisfy 1 <= n <= {N}, got {n}")
    idx = np.sort(_partial_permutation(rng.generator, n, N))
    return Sample(idx, pop.ncs[idx], pop.top10[idx], N)


def srswr(items, m: int, rng: RngStream):
    """Sample ``m`` items uniformly with replacement.

    Returns an ndarray when given one, otherwise a list.
    """
    if m < 1:
        raise ValueError(f"number of draws must be >= 1, got {m}")
    if isinstance(items, np.ndarray):
        if items.size < 1:
            raise ValueError("cannot sample from an empty collection")
        idx = rng.generator.integers(0, items.shape[0], size=m)
        return items[idx]
    seq = list(items)
    if not seq:
        raise ValueError("cannot sample from an empty collection")
    idx = rng.generator.integers(0, len(seq), size=m)
    return [seq[i] for i in idx]
