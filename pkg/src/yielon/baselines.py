"""Greedy baseline selector and the four experimental regimes."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .archipelago import (
    EXPLORATION_EXTRINSIC,
    EXPLORATION_G_SPECIAL,
    EXPLORATION_INTRINSIC,
    EXPLORATION_NONE,
    CiaRegistry,
    IslandState,
    intrinsic_explore,
)


class Selector(str, enum.Enum):
    GREEDY = "greedy"
    LATENT_YIELD = "latent-yield"


@dataclass(frozen=True)
class RegimeConfig:
    selector: Selector = Selector.LATENT_YIELD
    use_g_island: bool = True

    @property
    def use_yielory(self) -> bool:
        return self.selector is Selector.LATENT_YIELD

    @property
    def name(self) -> str:
        return f"{'yielory' if self.use_yielory else 'no-yielory'}-{'g' if self.use_g_island else 'no-g'}"

    @classmethod
    def from_name(cls, name: str) -> RegimeConfig:
        try:
            return REGIMES[name]
        except KeyError:
            raise ValueError(f"unknown regime {name!r}; expected one of {sorted(REGIMES)}") from None


REGIMES = {
    r.name: r
    for r in (
        RegimeConfig(Selector.GREEDY, False),
        RegimeConfig(Selector.GREEDY, True),
        RegimeConfig(Selector.LATENT_YIELD, False),
        RegimeConfig(Selector.LATENT_YIELD, True),
    )
}

# Row order of the comparison table.
REGIME_ORDER = ("no-yielory-no-g", "no-yielory-g", "yielory-no-g", "yielory-g")


def greedy_select(registry: CiaRegistry, island: IslandState, *,
                  g_enabled: bool = False) -> tuple[str, str]:
    """Return ``(algorithm, exploration)`` for the greedy strategy.

    A normal island copies the registry's best algorithm whenever it differs
    from its own. A G-Island instead jumps to an algorithm no island is
    running each time it is not itself the best island.
    """
    best = registry.query_best()
    if best is None:
        return island.active, EXPLORATION_NONE
    if g_enabled:
        if registry.best_island == island.island_id:
            return island.active, EXPLORATION_NONE
        in_use = {e.algorithm for e in registry.snapshot().values()} | {island.active}
        fresh = [a for a in island.repertoire if a not in in_use]
        if fresh:
            return fresh[int(island.rng.integers(len(fresh)))], EXPLORATION_G_SPECIAL
        return intrinsic_explore(island), EXPLORATION_INTRINSIC
    best_algo, _ = best
    if best_algo == island.active:
        return island.active, EXPLORATION_NONE
    return best_algo, EXPLORATION_EXTRINSIC
