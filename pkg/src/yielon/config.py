"""Experiment configuration: YAML schema, defaults and validation.

Schema (every key optional, unknown keys rejected)::

    domain: sorting | gridworld          # default sorting
    episodes: int                        # default 300 (sorting) / 500 (gridworld)
    seed: int                            # default 0
    regime: yielory-g | yielory-no-g | no-yielory-g | no-yielory-no-g
    output: path                         # default: none (CLI --out overrides)
    deterministic: bool                  # lock-step rounds, default true
    allow_multiple_g: bool               # default false
    params:                              # YieldParams fields
      upsilon_max: 100
      ...
    islands:                             # default: the domain's standard layout
      - start: sorting/counting          # required per island
        repertoire: [...]                # default: every algorithm of the domain
        g_island: false
        schedule:                        # sorting only
          - {kind: RandS, start: 0, end: 100}
        obstacles: 30                    # gridworld only
        size: [20, 20]                   # gridworld only
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .baselines import REGIMES, RegimeConfig
from .core import YieldParams
from .domains.gridworld import RL_ALGORITHMS
from .domains.sorting import COUNTING, INSERTION, QUICK, SORTING_ALGORITHMS, DataKind, PhaseSchedule
from .errors import ConfigError

DOMAINS = ("sorting", "gridworld")
DEFAULT_EPISODES = {"sorting": 300, "gridworld": 500}
DEFAULT_REGIME = "yielory-g"
DEFAULT_OBSTACLES = 30
DEFAULT_SIZE = (20, 20)

_TOP_KEYS = {"domain", "episodes", "seed", "regime", "output", "deterministic",
             "allow_multiple_g", "params", "islands"}
_ISLAND_KEYS = {"start", "repertoire", "g_island", "schedule", "obstacles", "size"}
_PHASE_KEYS = {"kind", "start", "end"}


@dataclass(frozen=True)
class IslandSpec:
    start: str
    repertoire: tuple[str, ...]
    g_island: bool = False
    schedule: PhaseSchedule | None = None
    obstacles: int = DEFAULT_OBSTACLES
    size: tuple[int, int] = DEFAULT_SIZE


@dataclass(frozen=True)
class ExperimentConfig:
    domain: str = "sorting"
    islands: tuple[IslandSpec, ...] = ()
    params: YieldParams = field(default_factory=YieldParams)
    regime: RegimeConfig = field(default_factory=lambda: REGIMES[DEFAULT_REGIME])
    episodes: int = 300
    seed: int = 0
    output: str | None = None
    deterministic: bool = True
    allow_multiple_g: bool = False

    @property
    def g_islands(self) -> list[int]:
        return [i for i, spec in enumerate(self.islands, 1) if spec.g_island]

    def replace(self, **changes) -> ExperimentConfig:
        return validate(dataclasses.replace(self, **changes))

    def to_dict(self) -> dict:
        islands = []
        for spec in self.islands:
            d = {"start": spec.start, "repertoire": list(spec.repertoire),
                 "g_island": spec.g_island}
            if self.domain == "sorting":
                if spec.schedule is not None:
                    d["schedule"] = [{"kind": DataKind(k).value, "start": s, "end": e}
                                     for k, s, e in spec.schedule.phases]
            else:
                d["obstacles"] = spec.obstacles
                d["size"] = list(spec.size)
            islands.append(d)
        return {
            "domain": self.domain,
            "episodes": self.episodes,
            "seed": self.seed,
            "regime": self.regime.name,
            "output": self.output,
            "deterministic": self.deterministic,
            "allow_multiple_g": self.allow_multiple_g,
            "params": dataclasses.asdict(self.params),
            "islands": islands,
        }


def domain_algorithms(domain: str) -> tuple[str, ...]:
    return SORTING_ALGORITHMS if domain == "sorting" else RL_ALGORITHMS


def default_islands(domain: str) -> tuple[IslandSpec, ...]:
    """Standard layouts: island 2 is flagged as the G-Island in both domains."""
    algos = domain_algorithms(domain)
    if domain == "sorting":
        starts = (COUNTING, INSERTION, QUICK)
    else:
        starts = ("rl/qlearning/a0.1", "rl/sarsa/a0.1", "rl/doubleq/a0.1", "rl/qlearning/a0.7")
    return tuple(IslandSpec(s, algos, g_island=(i == 2)) for i, s in enumerate(starts, 1))


def default_config(domain: str = "sorting") -> ExperimentConfig:
    if domain not in DOMAINS:
        raise ConfigError("domain", f"expected one of {DOMAINS}, got {domain!r}")
    return ExperimentConfig(domain=domain, islands=default_islands(domain),
                            episodes=DEFAULT_EPISODES[domain])


def _check_keys(data, allowed, where):
    if not isinstance(data, dict):
        raise ConfigError(where or "<root>", f"expected a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        prefix = f"{where}." if where else ""
        raise ConfigError(prefix + str(unknown[0]), "unknown key")


def _int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(name, f"must be >= {minimum}")
    return value


def _bool(value, name):
    if not isinstance(value, bool):
        raise ConfigError(name, f"expected true/false, got {value!r}")
    return value


def _parse_island(raw, idx, domain) -> IslandSpec:
    where = f"islands[{idx}]"
    _check_keys(raw, _ISLAND_KEYS, where)
    if "start" not in raw:
        raise ConfigError(f"{where}.start", "missing starting algorithm")
    repertoire = raw.get("repertoire", list(domain_algorithms(domain)))
    if not isinstance(repertoire, list) or not all(isinstance(a, str) for a in repertoire):
        raise ConfigError(f"{where}.repertoire", "expected a list of algorithm ids")
    schedule = None
    if "schedule" in raw:
        if domain != "sorting":
            raise ConfigError(f"{where}.schedule", "only valid for the sorting domain")
        phases = []
        if not isinstance(raw["schedule"], list) or not raw["schedule"]:
            raise ConfigError(f"{where}.schedule", "expected a non-empty list of phases")
        for j, ph in enumerate(raw["schedule"]):
            pw = f"{where}.schedule[{j}]"
            _check_keys(ph, _PHASE_KEYS, pw)
            try:
                kind = DataKind(ph.get("kind"))
            except ValueError:
                raise ConfigError(f"{pw}.kind", f"expected one of {[k.value for k in DataKind]}") from None
            phases.append((kind, _int(ph.get("start"), f"{pw}.start", 0),
                           _int(ph.get("end"), f"{pw}.end", 1)))
        try:
            schedule = PhaseSchedule(tuple(phases))
        except ValueError as exc:
            raise ConfigError(f"{where}.schedule", str(exc)) from None
    if domain != "gridworld" and ("obstacles" in raw or "size" in raw):
        key = "obstacles" if "obstacles" in raw else "size"
        raise ConfigError(f"{where}.{key}", "only valid for the gridworld domain")
    size = raw.get("size", list(DEFAULT_SIZE))
    if (not isinstance(size, (list, tuple)) or len(size) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 3 for v in size)):
        raise ConfigError(f"{where}.size", "expected [width, height] with both >= 3")
    return IslandSpec(
        start=raw["start"],
        repertoire=tuple(repertoire),
        g_island=_bool(raw.get("g_island", False), f"{where}.g_island"),
        schedule=schedule,
        obstacles=_int(raw.get("obstacles", DEFAULT_OBSTACLES), f"{where}.obstacles", 0),
        size=tuple(size),
    )


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check cross-field invariants; returns ``cfg`` unchanged when valid."""
    if cfg.domain not in DOMAINS:
        raise ConfigError("domain", f"expected one of {DOMAINS}, got {cfg.domain!r}")
    _int(cfg.episodes, "episodes", 0)
    _int(cfg.seed, "seed", 0)
    if not cfg.islands:
        raise ConfigError("islands", "at least one island is required")
    known = set(domain_algorithms(cfg.domain))
    for i, spec in enumerate(cfg.islands):
        where = f"islands[{i}]"
        if not spec.repertoire:
            raise ConfigError(f"{where}.repertoire", "must not be empty")
        if len(set(spec.repertoire)) != len(spec.repertoire):
            raise ConfigError(f"{where}.repertoire", "contains duplicates")
        bad = [a for a in spec.repertoire if a not in known]
        if bad:
            raise ConfigError(f"{where}.repertoire", f"unknown algorithm {bad[0]!r} for domain {cfg.domain}")
        if spec.start not in spec.repertoire:
            raise ConfigError(f"{where}.start", f"{spec.start!r} is not in the repertoire")
    if len(cfg.g_islands) > 1 and not cfg.allow_multiple_g:
        raise ConfigError("islands", "more than one G-Island; set allow_multiple_g to override")
    if cfg.regime.use_g_island and not cfg.g_islands:
        raise ConfigError("regime", f"regime {cfg.regime.name} needs an island with g_island: true")
    return cfg


def parse_config(data) -> ExperimentConfig:
    """Build a validated config from an already-parsed mapping."""
    if data is None:
        data = {}
    _check_keys(data, _TOP_KEYS, "")
    domain = data.get("domain", "sorting")
    if domain not in DOMAINS:
        raise ConfigError("domain", f"expected one of {DOMAINS}, got {domain!r}")
    base = default_config(domain)

    params = base.params
    if "params" in data:
        raw = data["params"] or {}
        names = {f.name for f in dataclasses.fields(YieldParams)}
        _check_keys(raw, names, "params")
        try:
            params = YieldParams(**raw)
        except ConfigError as exc:
            raise ConfigError(f"params.{exc.field}", str(exc).split(": ", 1)[1]) from None

    regime = base.regime
    if "regime" in data:
        if data["regime"] not in REGIMES:
            raise ConfigError("regime", f"expected one of {sorted(REGIMES)}, got {data['regime']!r}")
        regime = REGIMES[data["regime"]]

    islands = base.islands
    if "islands" in data:
        if not isinstance(data["islands"], list):
            raise ConfigError("islands", "expected a list")
        islands = tuple(_parse_island(raw, i, domain) for i, raw in enumerate(data["islands"]))

    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output", "expected a path string")

    cfg = ExperimentConfig(
        domain=domain,
        islands=islands,
        params=params,
        regime=regime,
        episodes=data.get("episodes", base.episodes),
        seed=data.get("seed", 0),
        output=output,
        deterministic=_bool(data.get("deterministic", True), "deterministic"),
        allow_multiple_g=_bool(data.get("allow_multiple_g", False), "allow_multiple_g"),
    )
    return validate(cfg)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("path", f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError("path", f"cannot parse {path}: {exc}") from None
    return parse_config(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
