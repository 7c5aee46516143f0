"""Obstacle-avoidance gridworld with tabular learners.

The robot perceives the occupancy of its four neighbours (16 states) and
picks one of four moves. Each action drains 2.5% of the battery, so an
episode is 40 actions. The episode's raw credit is 10 per completed run of
``streak_length`` collision-free actions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

N_STATES = 16
N_ACTIONS = 4
# (dx, dy) for north, east, south, west; y grows downwards.
MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))

BATTERY_FULL = 100.0
BATTERY_DRAIN = 2.5
STREAK_LENGTH = 10
STREAK_CREDIT = 10
COLLISION_REWARD = -10.0
MOVE_REWARD = 1.0

LEARNER_KINDS = ("qlearning", "sarsa", "doubleq")
LEARNING_RATES = (0.1, 0.7)
RL_ALGORITHMS = tuple(f"rl/{k}/a{a}" for k in LEARNER_KINDS for a in LEARNING_RATES)
_ALGO_RE = re.compile(r"^rl/(qlearning|sarsa|doubleq)/a([0-9.]+)$")


class GridWorld:
    """Rectangular arena with static obstacles.

    With ``walls=True`` the border ring is blocked; otherwise moves wrap
    around the edges (a torus), which gives a truly obstacle-free world.
    """

    def __init__(self, width=20, height=20, n_obstacles=30, rng=None, *,
                 walls=True, obstacles=None, start=None):
        self.width = width
        self.height = height
        self.walls = walls
        rng = np.random.default_rng(rng)
        interior = [(x, y) for y in range(height) for x in range(width)
                    if not self._is_border((x, y))]
        if obstacles is None:
            n = min(n_obstacles, max(len(interior) - 1, 0))
            picks = rng.choice(len(interior), size=n, replace=False) if n else []
            obstacles = {interior[int(i)] for i in picks}
        self.obstacles = frozenset(obstacles)
        if start is None:
            free = [c for c in interior if c not in self.obstacles]
            if not free:
                raise ValueError("world has no free cell for the robot")
            start = free[int(rng.integers(len(free)))]
        if self.blocked(start):
            raise ValueError(f"start cell {start} is blocked")
        self.position = start

    def _is_border(self, cell):
        x, y = cell
        return self.walls and (x in (0, self.width - 1) or y in (0, self.height - 1))

    def blocked(self, cell) -> bool:
        x, y = cell
        if self.walls and not (0 <= x < self.width and 0 <= y < self.height):
            return True
        return self._is_border(cell) or cell in self.obstacles

    def target(self, cell, action):
        dx, dy = MOVES[action]
        x, y = cell[0] + dx, cell[1] + dy
        if not self.walls:
            x, y = x % self.width, y % self.height
        return x, y

    def perceive(self, cell=None) -> int:
        cell = self.position if cell is None else cell
        state = 0
        for a in range(N_ACTIONS):
            if self.blocked(self.target(cell, a)):
                state |= 1 << a
        return state

    def step(self, action) -> bool:
        """Attempt a move; returns True on collision (position unchanged)."""
        nxt = self.target(self.position, action)
        if self.blocked(nxt):
            return True
        self.position = nxt
        return False

    def render(self) -> str:
        rows = []
        for y in range(self.height):
            row = []
            for x in range(self.width):
                if (x, y) == self.position:
                    row.append("R")
                elif self.blocked((x, y)):
                    row.append("#")
                else:
                    row.append(".")
            rows.append("".join(row))
        return "\n".join(rows)


def q_update(table, s, a, r, s2, alpha, gamma):
    table[s, a] += alpha * (r + gamma * table[s2].max() - table[s, a])
    return table


def sarsa_update(table, s, a, r, s2, a2, alpha, gamma):
    table[s, a] += alpha * (r + gamma * table[s2, a2] - table[s, a])
    return table


def double_q_update(tables, s, a, r, s2, alpha, gamma, coin: bool):
    """Update one of the two tables; ``coin`` True picks the first."""
    first, second = tables if coin else tables[::-1]
    a_star = int(np.argmax(first[s2]))
    first[s, a] += alpha * (r + gamma * second[s2, a_star] - first[s, a])
    return tables


@dataclass
class Learner:
    kind: str
    alpha: float
    gamma: float = 0.9
    epsilon: float = 0.1
    tables: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in LEARNER_KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if not self.tables:
            n = 2 if self.kind == "doubleq" else 1
            self.tables = [np.zeros((N_STATES, N_ACTIONS)) for _ in range(n)]

    @classmethod
    def from_id(cls, algorithm: str, **kw) -> Learner:
        m = _ALGO_RE.match(algorithm)
        if not m:
            raise ValueError(f"unknown RL algorithm id {algorithm!r}")
        return cls(m.group(1), float(m.group(2)), **kw)

    def values(self, s):
        if self.kind == "doubleq":
            return self.tables[0][s] + self.tables[1][s]
        return self.tables[0][s]

    def act(self, s, rng) -> int:
        if rng.random() < self.epsilon:
            return int(rng.integers(N_ACTIONS))
        return int(np.argmax(self.values(s)))

    def update(self, s, a, r, s2, a2, rng):
        if self.kind == "qlearning":
            q_update(self.tables[0], s, a, r, s2, self.alpha, self.gamma)
        elif self.kind == "sarsa":
            sarsa_update(self.tables[0], s, a, r, s2, a2, self.alpha, self.gamma)
        else:
            double_q_update(self.tables, s, a, r, s2, self.alpha, self.gamma,
                            bool(rng.random() < 0.5))


@dataclass
class EpisodeResult:
    raw_credit: float
    streaks: int
    collisions: int
    actions: int
    battery: float
    positions: list


def run_episode(learner: Learner, world: GridWorld, rng, *,
                streak_length=STREAK_LENGTH) -> EpisodeResult:
    """Drive the robot from a full battery until it is empty."""
    battery = BATTERY_FULL
    streak = streaks = collisions = actions = 0
    positions = []
    s = world.perceive()
    a = learner.act(s, rng)
    while battery > 0:
        collided = world.step(a)
        battery -= BATTERY_DRAIN
        actions += 1
        if collided:
            collisions += 1
            streak = 0
        else:
            streak += 1
            if streak == streak_length:
                streaks += 1
                streak = 0
        positions.append(world.position)
        s2 = world.perceive()
        a2 = learner.act(s2, rng)
        learner.update(s, a, COLLISION_REWARD if collided else MOVE_REWARD, s2, a2, rng)
        s, a = s2, a2
    return EpisodeResult(float(STREAK_CREDIT * streaks), streaks, collisions, actions,
                         battery, positions)


class GridworldDomain:
    """Executor owning one world, robot and learner set per island.

    Learner tables persist per island while the algorithm is inactive.
    """

    def __init__(self, worlds: dict[int, GridWorld], rngs: dict[int, np.random.Generator]):
        self.worlds = worlds
        self.rngs = rngs
        self.learners: dict[int, dict[str, Learner]] = {i: {} for i in worlds}

    def learner(self, island_id, algorithm) -> Learner:
        pool = self.learners[island_id]
        if algorithm not in pool:
            pool[algorithm] = Learner.from_id(algorithm)
        return pool[algorithm]

    def run(self, island_id: int, algorithm: str, episode: int) -> tuple[float, str]:
        result = run_episode(self.learner(island_id, algorithm), self.worlds[island_id],
                             self.rngs[island_id])
        return result.raw_credit, f"world-{island_id}"
