"""Islands, the central registry and the exploration policies.

Island ids are 1-based. Algorithms are plain string ids such as
``"sorting/quick"`` or ``"rl/qlearning/a0.7"``.

After every step an island reports its state *after* the decision: the
algorithm it will run next, its Yielon count, and the mean normalized credit
of its current window (0 right after a switch, since the window is cleared).
An :class:`EpisodeRecord` names the algorithm that produced the credit.
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .core import (
    CreditWindow,
    Decision,
    DecisionKind,
    NormalizationState,
    YieldParams,
    Yielory,
    decide,
    normalize_credit,
)

logger = logging.getLogger(__name__)

EXPLORATION_NONE = "none"
EXPLORATION_INTRINSIC = "intrinsic"
EXPLORATION_EXTRINSIC = "extrinsic"
EXPLORATION_G_SPECIAL = "g-special"


@dataclass(frozen=True)
class CiaEntry:
    algorithm: str
    yielons: float | None
    perf: float


class CiaRegistry:
    """Latest report of every island plus the derived best entry.

    Reads and writes are serialized by a lock so islands may report from
    worker threads; ``snapshot`` returns a consistent copy.
    """

    def __init__(self, island_ids=()):
        self._entries: dict[int, CiaEntry | None] = {i: None for i in island_ids}
        self._lock = threading.Lock()
        self._best: int | None = None

    def __getstate__(self):
        with self._lock:
            state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def register(self, island_id: int):
        with self._lock:
            self._entries.setdefault(island_id, None)

    def report(self, island_id: int, algorithm: str, yielons: float | None,
               perf: float) -> CiaRegistry:
        with self._lock:
            if island_id not in self._entries:
                raise KeyError(f"unknown island id {island_id}")
            self._entries[island_id] = CiaEntry(algorithm, yielons, float(perf))
            self._best = self._argmax()
        return self

    def _argmax(self):
        best = None
        for island_id in sorted(self._entries):
            entry = self._entries[island_id]
            if entry is None:
                continue
            if best is None or entry.perf > self._entries[best].perf:
                best = island_id
        return best

    @property
    def best_island(self) -> int | None:
        return self._best

    def query_best(self) -> tuple[str, float | None] | None:
        """``(algorithm, yielons)`` of the best island, or None with no reports."""
        with self._lock:
            if self._best is None:
                return None
            entry = self._entries[self._best]
            return entry.algorithm, entry.yielons

    def entry(self, island_id: int) -> CiaEntry | None:
        with self._lock:
            return self._entries[island_id]

    def snapshot(self) -> dict[int, CiaEntry]:
        with self._lock:
            return {k: v for k, v in self._entries.items() if v is not None}

    def __len__(self):
        return sum(e is not None for e in self._entries.values())


class DomainExecutor(Protocol):
    def run(self, island_id: int, algorithm: str, episode: int) -> tuple[float, str]:
        """Execute one task instance, returning ``(raw_credit, phase_label)``."""


@dataclass
class IslandState:
    island_id: int
    repertoire: list[str]
    active: str
    params: YieldParams = field(default_factory=YieldParams)
    is_g_island: bool = False
    rng: np.random.Generator = field(default_factory=np.random.default_rng)
    yielory: Yielory | None = None
    window: CreditWindow | None = None
    norm: NormalizationState = field(default_factory=NormalizationState)
    total_credit: float = 0.0
    switches: int = 0
    intrinsic: int = 0
    extrinsic: int = 0
    g_special: int = 0
    failures: int = 0

    def __post_init__(self):
        if not self.repertoire:
            raise ValueError("repertoire must not be empty")
        if len(set(self.repertoire)) != len(self.repertoire):
            raise ValueError("repertoire contains duplicates")
        if self.active not in self.repertoire:
            raise ValueError(f"active algorithm {self.active!r} not in repertoire")
        self.repertoire = list(self.repertoire)
        if self.yielory is None:
            self.yielory = Yielory(self.params.upsilon_initial, self.params.upsilon_max)
        if self.window is None:
            self.window = CreditWindow(self.params.window_size)


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    island: int
    algorithm: str
    phase: str
    raw_credit: float
    norm_credit: float
    sigma: float | None
    yielons: float | None
    decision: str
    switch: bool
    exploration: str


def intrinsic_explore(island: IslandState) -> str:
    """Uniform draw from the repertoire minus the active algorithm."""
    others = [a for a in island.repertoire if a != island.active]
    if not others:
        return island.active
    return others[int(island.rng.integers(len(others)))]


def extrinsic_explore(island: IslandState, best: str) -> IslandState:
    """Adopt ``best``, importing it into the repertoire if needed."""
    if best not in island.repertoire:
        island.repertoire.append(best)
    island.active = best
    return island


def g_island_explore(island: IslandState, snapshot: dict[int, CiaEntry],
                     params: YieldParams) -> tuple[str, bool]:
    """Pick the G-Island's next algorithm.

    ``snapshot`` holds every island's latest entry including the G-Island's
    own. Returns ``(algorithm, special)`` where ``special`` tells whether the
    diversity draw fired rather than the intrinsic fallback.
    """
    own = snapshot.get(island.island_id)
    g_yielons = island.yielory.current if own is None or own.yielons is None else own.yielons
    counts = [e.yielons for e in snapshot.values() if e.yielons is not None]
    lagging = bool(counts) and (math.fsum(counts) / len(counts) - g_yielons > params.delta_g)

    leading = False
    if own is not None:
        best_id = min(snapshot, key=lambda i: (-snapshot[i].perf, i))
        shared = any(e.algorithm == own.algorithm
                     for i, e in snapshot.items() if i != island.island_id)
        leading = best_id == island.island_id and shared

    if lagging or leading:
        in_use = {e.algorithm for e in snapshot.values()} | {island.active}
        fresh = [a for a in island.repertoire if a not in in_use]
        if fresh:
            return fresh[int(island.rng.integers(len(fresh)))], True
    return intrinsic_explore(island), False


def _normalize(island: IslandState, raw: float) -> float:
    # Zero credit (possible in the gridworld) cannot set a running maximum.
    if raw <= 0:
        return 0.0
    return normalize_credit(raw, island.norm, island.active)


def _switch(island: IslandState, target: str, exploration: str):
    if exploration == EXPLORATION_EXTRINSIC:
        extrinsic_explore(island, target)
        island.extrinsic += 1
    else:
        island.active = target
        if exploration == EXPLORATION_G_SPECIAL:
            island.g_special += 1
        else:
            island.intrinsic += 1
    island.switches += 1


def step_island(island: IslandState, registry: CiaRegistry, executor: DomainExecutor,
                params: YieldParams, episode: int, *, greedy: bool = False,
                g_enabled: bool = True) -> EpisodeRecord:
    """Run one instance on ``island`` and apply the selection rule.

    ``greedy`` selects the baseline strategy, which never touches the
    Yielory. ``g_enabled=False`` makes a flagged G-Island behave normally.
    """
    ran = island.active
    try:
        raw, phase = executor.run(island.island_id, ran, episode)
        raw = float(raw)
    except Exception as exc:  # noqa: BLE001 - any executor fault fails the episode
        island.failures += 1
        logger.warning("island %d episode %d failed: %s", island.island_id, episode, exc)
        return EpisodeRecord(episode, island.island_id, ran, "", math.nan, math.nan,
                             None, None, "failed", False, EXPLORATION_NONE)

    c_norm = _normalize(island, raw)
    island.total_credit += c_norm
    use_g = g_enabled and island.is_g_island

    if greedy:
        from .baselines import greedy_select

        registry.report(island.island_id, ran, None, c_norm)
        target, exploration = greedy_select(registry, island, g_enabled=use_g)
        switched = exploration != EXPLORATION_NONE
        if switched:
            _switch(island, target, exploration)
            registry.report(island.island_id, island.active, None, c_norm)
        return EpisodeRecord(episode, island.island_id, ran, phase, raw, c_norm, None,
                             None, "greedy_switch" if switched else "greedy_keep",
                             switched, exploration)

    island.window = island.window.push(c_norm)
    perf = island.window.mean()
    pre_yielons = island.yielory.current
    decision, island.yielory, island.window = decide(
        island.window, island.yielory, c_norm, registry.query_best(), ran, params)

    exploration = EXPLORATION_NONE
    if decision.explores:
        if use_g:
            snap = registry.snapshot()
            snap[island.island_id] = CiaEntry(ran, pre_yielons, perf)
            target, special = g_island_explore(island, snap, params)
            exploration = EXPLORATION_G_SPECIAL if special else EXPLORATION_INTRINSIC
        elif decision.kind is DecisionKind.EXTRINSIC:
            target, exploration = decision.target, EXPLORATION_EXTRINSIC
        else:
            target, exploration = intrinsic_explore(island), EXPLORATION_INTRINSIC
        _switch(island, target, exploration)

    registry.report(island.island_id, island.active, island.yielory.current, island.window.mean())
    return EpisodeRecord(episode, island.island_id, ran, phase, raw, c_norm,
                         decision.sigma, island.yielory.current, decision.kind.value,
                         decision.explores, exploration)


__all__ = [
    "CiaEntry", "CiaRegistry", "Decision", "DomainExecutor", "EpisodeRecord",
    "IslandState", "extrinsic_explore", "g_island_explore", "intrinsic_explore",
    "step_island",
]
