"""Latent-yield mathematics: credit normalization, squeezing factor, Yielon
dynamics and the per-instance switch decision.

Everything here is a function over explicit values. The only mutable object
is :class:`NormalizationState`, which :func:`normalize_credit` updates in
place as new instances arrive.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError, UndefinedSigma

CREDIT_SCALE = 100.0


@dataclass(frozen=True)
class YieldParams:
    """Tunables of the switching mechanism.

    Defaults are the values used for both experiment domains; ``sigma_tol``
    is the half-width of the band treated as a flat (saturated) window and
    ``delta_g`` the Yielon gap that lets the G-Island draw outside the
    algorithms already in use.
    """

    upsilon_max: float = 100.0
    upsilon_min: float = 30.0
    upsilon_initial: float = 60.0
    window_size: int = 5
    p: float = 0.05
    c_min_norm: float = 80.0
    epsilon: float = 10.0
    sigma_tol: float = 0.5
    delta_g: float = 10.0

    def __post_init__(self):
        for name in ("upsilon_max", "upsilon_min", "upsilon_initial", "p",
                     "c_min_norm", "epsilon", "sigma_tol", "delta_g"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or not math.isfinite(value):
                raise ConfigError(name, f"expected a finite number, got {value!r}")
        if isinstance(self.window_size, bool) or not isinstance(self.window_size, int):
            raise ConfigError("window_size", f"expected an integer, got {self.window_size!r}")
        if not self.upsilon_min > 0:
            raise ConfigError("upsilon_min", "must be > 0")
        if not self.upsilon_min < self.upsilon_initial:
            raise ConfigError("upsilon_min", "must be < upsilon_initial")
        if not self.upsilon_initial <= self.upsilon_max:
            raise ConfigError("upsilon_initial", "must be <= upsilon_max")
        if self.window_size < 2:
            raise ConfigError("window_size", "must be >= 2")
        if not self.p > 0:
            raise ConfigError("p", "must be > 0")
        if not 0 <= self.c_min_norm <= CREDIT_SCALE:
            raise ConfigError("c_min_norm", "must lie in [0, 100]")
        if not self.epsilon > 0:
            raise ConfigError("epsilon", "must be > 0")
        if not self.sigma_tol >= 0:
            raise ConfigError("sigma_tol", "must be >= 0")
        if not self.delta_g > 0:
            raise ConfigError("delta_g", "must be > 0")


@dataclass(frozen=True)
class CreditWindow:
    """Sliding window over the most recent normalized credits."""

    capacity: int
    entries: tuple[float, ...] = ()

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("window capacity must be positive")
        if len(self.entries) > self.capacity:
            raise ValueError("window holds more entries than its capacity")
        for c in self.entries:
            if not 0.0 <= c <= CREDIT_SCALE:
                raise ValueError(f"normalized credit {c!r} outside [0, 100]")

    def push(self, credit: float) -> CreditWindow:
        entries = (self.entries + (float(credit),))[-self.capacity:]
        return CreditWindow(self.capacity, entries)

    def cleared(self) -> CreditWindow:
        return CreditWindow(self.capacity)

    def mean(self) -> float:
        if not self.entries:
            return 0.0
        return math.fsum(self.entries) / len(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Yielory:
    """Yielon store; ``current`` is kept within ``[0, capacity]``."""

    current: float
    capacity: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.current <= self.capacity:
            raise ValueError(f"Yielon count {self.current!r} outside [0, {self.capacity}]")


@dataclass
class NormalizationState:
    """Per-algorithm running maximum of the raw credit seen by one agent."""

    maxima: dict[str, float] = field(default_factory=dict)

    def best(self, algo: str) -> float | None:
        return self.maxima.get(algo)


def normalize_credit(raw: float, state: NormalizationState, algo: str) -> float:
    """Scale ``raw`` to a percentage of the best credit ``algo`` has earned.

    The running maximum is updated first, so a new best maps to exactly 100.
    """
    if not raw > 0 or not math.isfinite(raw):
        raise ValueError(f"raw credit must be a positive finite number, got {raw!r}")
    best = state.maxima.get(algo)
    if best is None or raw >= best:
        state.maxima[algo] = raw
        return CREDIT_SCALE
    return raw / best * CREDIT_SCALE


def squeezing_factor(window: CreditWindow) -> float:
    """Mean of consecutive differences of the windowed credits."""
    entries = window.entries
    n = len(entries)
    if n < 2:
        raise UndefinedSigma(f"squeezing factor needs >= 2 credits, window has {n}")
    return math.fsum(b - a for a, b in zip(entries, entries[1:])) / (n - 1)


def update_yielons(yielory: Yielory, sigma: float, params: YieldParams,
                   saturated_branch: bool = False) -> Yielory:
    """Charge or deplete the Yielory in proportion to its fill ratio.

    ``saturated_branch`` selects the small top-up by ``params.p`` used when
    the window is flat and the latest credit clears the threshold.
    """
    step = params.p if saturated_branch else sigma
    new = yielory.current + step * (yielory.current / params.upsilon_max)
    new = min(max(new, 0.0), params.upsilon_max)
    return Yielory(new, params.upsilon_max)


def delta_test(c_norm: float, params: YieldParams) -> float:
    return c_norm - params.c_min_norm


def is_flat(sigma: float, params: YieldParams) -> bool:
    return abs(sigma) <= params.sigma_tol


class DecisionKind(str, enum.Enum):
    EXPLOIT = "exploit"
    EXPLOIT_SATURATED = "exploit_saturated"
    INTRINSIC = "intrinsic_explore"
    EXTRINSIC = "extrinsic_explore"

    @property
    def explores(self) -> bool:
        return self in (DecisionKind.INTRINSIC, DecisionKind.EXTRINSIC)


@dataclass(frozen=True)
class Decision:
    kind: DecisionKind
    target: str | None = None
    reset: bool = False
    sigma: float | None = None

    def __post_init__(self):
        if self.kind is DecisionKind.EXTRINSIC and self.target is None:
            raise ValueError("extrinsic exploration needs a target algorithm")

    @property
    def explores(self) -> bool:
        return self.kind.explores


def decide(window: CreditWindow, yielory: Yielory, c_norm: float,
           best: tuple[str, float | None] | None, current_algo: str,
           params: YieldParams) -> tuple[Decision, Yielory, CreditWindow]:
    """One pass of the switching rule for the instance that produced ``c_norm``.

    ``window`` must already contain ``c_norm``. ``best`` is the registry's
    current ``(algorithm, yielons)`` or None when the registry is empty.
    Returns the decision with the updated Yielory and window; exploration
    resets the Yielory to ``upsilon_initial`` and clears the window.
    """
    try:
        sigma = squeezing_factor(window)
    except UndefinedSigma:
        return Decision(DecisionKind.EXPLOIT), yielory, window

    def reset(decision):
        return (replace(decision, reset=True),
                Yielory(params.upsilon_initial, params.upsilon_max),
                window.cleared())

    if not is_flat(sigma, params):
        kind = DecisionKind.EXPLOIT
        updated = update_yielons(yielory, sigma, params)
    elif delta_test(c_norm, params) >= 0:
        kind = DecisionKind.EXPLOIT_SATURATED
        updated = update_yielons(yielory, sigma, params, saturated_branch=True)
    else:
        if best is None:
            return reset(Decision(DecisionKind.INTRINSIC, sigma=sigma))
        best_algo, best_yielons = best
        close = best_yielons is None or \
            abs(best_yielons - yielory.current) < params.epsilon
        if best_algo == current_algo or close:
            return reset(Decision(DecisionKind.INTRINSIC, sigma=sigma))
        return reset(Decision(DecisionKind.EXTRINSIC, target=best_algo, sigma=sigma))

    if updated.current < params.upsilon_min:
        return reset(Decision(DecisionKind.INTRINSIC, sigma=sigma))
    return Decision(kind, sigma=sigma), updated, window
