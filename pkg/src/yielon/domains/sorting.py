"""Instrumented sorting domain.

Counting convention, applied identically to every algorithm:

* ``comparisons``: element-vs-element (or element-vs-key) comparisons.
* ``assignments``: every write of an element or a count into an array, plus
  loading an element into a temporary (insertion key, pivot).
* ``arithmetic``: explicit index arithmetic (``j -= 1``, ``i += 1``,
  ``idx += 1``, ``i + 1``). Bounds checks and ``for`` counters are free.
* ``reads`` / ``writes``: every access of the data array or an auxiliary
  array (count array, output slots).

Instruction count = comparisons + assignments + arithmetic; memory count =
reads + writes.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np

ARRAY_LENGTH = 20
LARGE_MAX = 10**6
SMALL_MIN, SMALL_MAX = 1, 35
ALMOST_SORTED_SWAPS = 2
SWAP_REACH = 3

QUICK = "sorting/quick"
INSERTION = "sorting/insertion"
COUNTING = "sorting/counting"
SORTING_ALGORITHMS = (QUICK, INSERTION, COUNTING)


class DataKind(str, enum.Enum):
    RAND_L = "RandL"
    RAND_S = "RandS"
    ALMO_S = "AlmoS"

    @property
    def value_max(self) -> int:
        return SMALL_MAX if self is DataKind.RAND_S else LARGE_MAX


@dataclass(frozen=True)
class SortInstance:
    values: tuple[int, ...]
    kind: DataKind
    seed: int


@dataclass
class InstrumentCounters:
    comparisons: int = 0
    assignments: int = 0
    arithmetic: int = 0
    reads: int = 0
    writes: int = 0

    @property
    def instructions(self) -> int:
        return self.comparisons + self.assignments + self.arithmetic

    @property
    def memory(self) -> int:
        return self.reads + self.writes


def generate_instance(kind: DataKind, rng: np.random.Generator, *,
                      length: int = ARRAY_LENGTH, swaps: int = ALMOST_SORTED_SWAPS) -> SortInstance:
    """Draw one array of ``kind``; the array is reproducible from ``.seed``."""
    kind = DataKind(kind)
    seed = int(rng.integers(2**32))
    gen = np.random.default_rng(seed)
    if kind is DataKind.RAND_L:
        values = gen.integers(0, LARGE_MAX, size=length, endpoint=True)
    elif kind is DataKind.RAND_S:
        values = gen.integers(SMALL_MIN, SMALL_MAX, size=length, endpoint=True)
    else:
        values = np.sort(gen.integers(0, LARGE_MAX, size=length, endpoint=True))
        for _ in range(swaps if length > 1 else 0):
            i = int(gen.integers(length - 1))
            j = min(length - 1, i + int(gen.integers(1, SWAP_REACH + 1)))
            values[i], values[j] = values[j], values[i]
    return SortInstance(tuple(int(v) for v in values), kind, seed)


def insertion_sort(data, ctr: InstrumentCounters) -> list:
    arr = list(data)
    for i in range(1, len(arr)):
        key = arr[i]
        ctr.reads += 1
        ctr.assignments += 1
        j = i - 1
        ctr.arithmetic += 1
        while j >= 0:
            ctr.reads += 1
            ctr.comparisons += 1
            if arr[j] > key:
                arr[j + 1] = arr[j]
                ctr.writes += 1
                ctr.assignments += 1
                j -= 1
                ctr.arithmetic += 1
            else:
                break
        arr[j + 1] = key
        ctr.writes += 1
        ctr.assignments += 1
    return arr


def _swap(arr, i, j, ctr):
    arr[i], arr[j] = arr[j], arr[i]
    ctr.reads += 2
    ctr.writes += 2
    ctr.assignments += 2


def _partition(arr, lo, hi, ctr):
    # Lomuto scheme with the last element as pivot.
    pivot = arr[hi]
    ctr.reads += 1
    ctr.assignments += 1
    i = lo - 1
    ctr.arithmetic += 1
    for j in range(lo, hi):
        ctr.reads += 1
        ctr.comparisons += 1
        if arr[j] <= pivot:
            i += 1
            ctr.arithmetic += 1
            _swap(arr, i, j, ctr)
    ctr.arithmetic += 1
    _swap(arr, i + 1, hi, ctr)
    return i + 1


def quick_sort(data, ctr: InstrumentCounters) -> list:
    arr = list(data)
    stack = [(0, len(arr) - 1)]
    while stack:
        lo, hi = stack.pop()
        if lo >= hi:
            continue
        p = _partition(arr, lo, hi, ctr)
        stack.append((p + 1, hi))
        stack.append((lo, p - 1))
    return arr


def counting_sort(data, ctr: InstrumentCounters, value_max: int) -> list:
    """Counting sort over the value range ``[0, value_max]``.

    Only occupied buckets are visited, but the counters are charged as if
    the full count array were initialized and scanned, which is what the
    dense loop does (see ``tests/test_sorting.py`` for the equivalence check).
    """
    buckets = value_max + 1
    # count = [0] * buckets
    ctr.assignments += buckets
    ctr.writes += buckets
    counts = Counter()
    for v in data:
        if not 0 <= v <= value_max:
            raise ValueError(f"value {v} outside counting range [0, {value_max}]")
        # count[v] += 1
        ctr.reads += 2
        ctr.writes += 1
        ctr.assignments += 1
        counts[v] += 1
    # for v in range(buckets): c = count[v]; emit v c times
    ctr.reads += buckets
    out = []
    for v in sorted(counts):
        for _ in range(counts[v]):
            out.append(v)
            ctr.writes += 1
            ctr.assignments += 1
            ctr.arithmetic += 1
    return out


def run_sort(algo: str, instance: SortInstance | list) -> tuple[list, InstrumentCounters]:
    """Sort with the named algorithm and return ``(output, counters)``."""
    if isinstance(instance, SortInstance):
        values, value_max = instance.values, instance.kind.value_max
    else:
        values = list(instance)
        value_max = max(values, default=0)
    ctr = InstrumentCounters()
    if algo == QUICK:
        out = quick_sort(values, ctr)
    elif algo == INSERTION:
        out = insertion_sort(values, ctr)
    elif algo == COUNTING:
        out = counting_sort(values, ctr, value_max)
    else:
        raise ValueError(f"unknown sorting algorithm {algo!r}")
    return out, ctr


def raw_credit(counters: InstrumentCounters) -> float:
    """Reciprocal of total work; the integer rounding is deliberately omitted."""
    return 1.0 / (counters.instructions + counters.memory + 1)


@dataclass(frozen=True)
class PhaseSchedule:
    """Data kind per episode as half-open ``[start, end)`` spans."""

    phases: tuple[tuple[DataKind, int, int], ...]

    def __post_init__(self):
        if not self.phases:
            raise ValueError("schedule needs at least one phase")
        expected = 0
        for kind, start, end in self.phases:
            DataKind(kind)
            if start != expected or end <= start:
                raise ValueError("phase spans must partition the episode range contiguously")
            expected = end

    @property
    def episodes(self) -> int:
        return self.phases[-1][2]

    @classmethod
    def default(cls, episodes: int, rng: np.random.Generator, n_phases: int = 3) -> PhaseSchedule:
        """Equal spans over a random ordering of the data kinds."""
        kinds = list(DataKind)
        order = [kinds[int(i)] for i in rng.permutation(len(kinds))]
        episodes = max(episodes, n_phases)
        bounds = [round(k * episodes / n_phases) for k in range(n_phases + 1)]
        return cls(tuple((order[k % len(order)], bounds[k], bounds[k + 1])
                         for k in range(n_phases)))


def schedule_kind(schedule: PhaseSchedule, episode: int) -> DataKind:
    for kind, start, end in schedule.phases:
        if start <= episode < end:
            return DataKind(kind)
    return DataKind(schedule.phases[-1][0])


class SortingDomain:
    """Executor feeding each island its own stream of scheduled instances."""

    def __init__(self, schedules: dict[int, PhaseSchedule], rngs: dict[int, np.random.Generator]):
        self.schedules = schedules
        self.rngs = rngs

    def run(self, island_id: int, algorithm: str, episode: int) -> tuple[float, str]:
        kind = schedule_kind(self.schedules[island_id], episode)
        instance = generate_instance(kind, self.rngs[island_id])
        out, ctr = run_sort(algorithm, instance)
        return raw_credit(ctr), kind.value
