"""Experiment orchestration, trace output and regime comparison."""
from __future__ import annotations

import csv
import json
import logging
import math
import statistics
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .archipelago import (
    EXPLORATION_EXTRINSIC,
    EXPLORATION_G_SPECIAL,
    EXPLORATION_INTRINSIC,
    CiaRegistry,
    EpisodeRecord,
    IslandState,
    step_island,
)
from .baselines import REGIME_ORDER, REGIMES
from .config import ExperimentConfig
from .domains.gridworld import GridWorld, GridworldDomain
from .domains.sorting import PhaseSchedule, SortingDomain

logger = logging.getLogger(__name__)

TRACE_HEADER = ("episode", "island", "algorithm", "phase", "raw_credit", "norm_credit",
                "sigma", "yielons", "decision", "switch", "exploration")
PLOT_HEADER = ("episode", "normalized_credit", "yielon_count", "switch_marker", "phase_label")

# Independent RNG streams per island.
_SELECT, _DOMAIN, _LAYOUT = 0, 1, 2


def _rng(seed, island_id, stream):
    return np.random.default_rng(np.random.SeedSequence([seed, island_id, stream]))


@dataclass
class IslandTotals:
    credits: float = 0.0
    switches: int = 0
    intrinsic: int = 0
    extrinsic: int = 0
    g_special: int = 0


@dataclass
class RunSummary:
    seed: int
    regime: str
    episodes: int
    domain: str
    deterministic: bool = True
    islands: dict[int, IslandTotals] = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        out = {
            "seed": self.seed,
            "regime": self.regime,
            "episodes": self.episodes,
            "domain": self.domain,
            "deterministic": self.deterministic,
            "islands": {str(i): vars(t).copy() for i, t in sorted(self.islands.items())},
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    @property
    def total_credits(self) -> float:
        return math.fsum(t.credits for t in self.islands.values())

    @property
    def total_extrinsic(self) -> int:
        return sum(t.extrinsic for t in self.islands.values())


def build_islands(config: ExperimentConfig):
    """Instantiate islands, registry and domain executor for ``config``."""
    islands, domain_rngs = [], {}
    schedules, worlds = {}, {}
    for island_id, spec in enumerate(config.islands, 1):
        islands.append(IslandState(
            island_id=island_id,
            repertoire=list(spec.repertoire),
            active=spec.start,
            params=config.params,
            is_g_island=spec.g_island,
            rng=_rng(config.seed, island_id, _SELECT),
        ))
        domain_rngs[island_id] = _rng(config.seed, island_id, _DOMAIN)
        layout = _rng(config.seed, island_id, _LAYOUT)
        if config.domain == "sorting":
            schedules[island_id] = spec.schedule or PhaseSchedule.default(config.episodes, layout)
        else:
            w, h = spec.size
            worlds[island_id] = GridWorld(w, h, spec.obstacles, layout)
    if config.domain == "sorting":
        executor = SortingDomain(schedules, domain_rngs)
    else:
        executor = GridworldDomain(worlds, domain_rngs)
    registry = CiaRegistry(range(1, len(islands) + 1))
    return islands, registry, executor


def _summarize(config, islands, error=None) -> RunSummary:
    totals = {
        isl.island_id: IslandTotals(isl.total_credit, isl.switches, isl.intrinsic,
                                    isl.extrinsic, isl.g_special)
        for isl in islands
    }
    return RunSummary(config.seed, config.regime.name, config.episodes, config.domain,
                      config.deterministic, totals, error)


class TraceWriter:
    """Appends records to ``trace.csv`` as they are produced."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / "trace.csv"
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(TRACE_HEADER)

    def write(self, record: EpisodeRecord):
        self._writer.writerow(_trace_row(record))

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _trace_row(r: EpisodeRecord):
    return [r.episode, r.island, r.algorithm, r.phase, _fmt(r.raw_credit), _fmt(r.norm_credit),
            _fmt(r.sigma), _fmt(r.yielons), r.decision, int(r.switch), r.exploration]


def _run_deterministic(config, islands, registry, executor, sink):
    greedy = not config.regime.use_yielory
    for episode in range(config.episodes):
        for island in islands:
            record = step_island(island, registry, executor, config.params, episode,
                                 greedy=greedy, g_enabled=config.regime.use_g_island)
            sink(record)
            if record.decision == "failed":
                return f"island {island.island_id} failed at episode {episode}"
    return None


def _run_free(config, islands, registry, executor, sink):
    greedy = not config.regime.use_yielory
    lock = threading.Lock()
    failed = []

    def worker(island):
        for episode in range(config.episodes):
            record = step_island(island, registry, executor, config.params, episode,
                                 greedy=greedy, g_enabled=config.regime.use_g_island)
            with lock:
                sink(record)
            if record.decision == "failed":
                failed.append(f"island {island.island_id} failed at episode {episode}")
                return

    with ThreadPoolExecutor(max_workers=len(islands)) as pool:
        list(pool.map(worker, islands))
    return failed[0] if failed else None


def run_experiment(config: ExperimentConfig, out_dir=None) -> tuple[list[EpisodeRecord], RunSummary]:
    """Run ``config`` to completion.

    With ``out_dir`` the trace is streamed to ``trace.csv`` and the summary
    and plot files are written at the end, including after a domain failure.
    """
    islands, registry, executor = build_islands(config)
    records: list[EpisodeRecord] = []
    writer = TraceWriter(out_dir) if out_dir is not None else None

    def sink(record):
        records.append(record)
        if writer is not None:
            writer.write(record)

    run = _run_deterministic if config.deterministic else _run_free
    try:
        error = run(config, islands, registry, executor, sink)
    finally:
        if writer is not None:
            writer.close()
    if error:
        logger.error("run aborted: %s", error)
    summary = _summarize(config, islands, error)
    if out_dir is not None:
        write_outputs(records, summary, out_dir, trace=False)
    return records, summary


def write_outputs(records, summary: RunSummary, directory, *, trace=True) -> list[Path]:
    """Write ``trace.csv``, ``summary.json`` and one plot file per island."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        if trace:
            with TraceWriter(directory) as writer:
                for r in records:
                    writer.write(r)
            written.append(writer.path)
        path = directory / "summary.json"
        path.write_text(json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
        written.append(path)
        by_island = {}
        for r in records:
            by_island.setdefault(r.island, []).append(r)
        for island_id in sorted(summary.islands):
            path = directory / f"plotdata_island{island_id}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(PLOT_HEADER)
                for r in by_island.get(island_id, []):
                    w.writerow([r.episode, _fmt(r.norm_credit), _fmt(r.yielons),
                                int(r.switch), r.phase])
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write outputs to {directory}: {exc}") from exc
    return written


def _opt_float(text):
    return None if text == "" else float(text)


def read_trace(path) -> list[EpisodeRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header in {path}: {header}")
        return [
            EpisodeRecord(int(ep), int(isl), algo, phase, float(raw), float(norm),
                          _opt_float(sigma), _opt_float(yl), decision, sw == "1", expl)
            for ep, isl, algo, phase, raw, norm, sigma, yl, decision, sw, expl in reader
        ]


def aggregate_records(records) -> dict[int, IslandTotals]:
    """Recompute per-island totals from a trace."""
    credits: dict[int, list[float]] = {}
    totals: dict[int, IslandTotals] = {}
    for r in records:
        t = totals.setdefault(r.island, IslandTotals())
        if not math.isnan(r.norm_credit):
            credits.setdefault(r.island, []).append(r.norm_credit)
        t.switches += int(r.switch)
        t.intrinsic += r.exploration == EXPLORATION_INTRINSIC
        t.extrinsic += r.exploration == EXPLORATION_EXTRINSIC
        t.g_special += r.exploration == EXPLORATION_G_SPECIAL
    for island, values in credits.items():
        totals[island].credits = math.fsum(values)
    return totals


@dataclass
class Cell:
    credits: list[float]
    switches: list[int]

    @staticmethod
    def _stats(values):
        mean = statistics.fmean(values) if values else math.nan
        spread = statistics.stdev(values) if len(values) > 1 else 0.0
        return mean, spread

    @property
    def credits_stats(self):
        return self._stats(self.credits)

    @property
    def switches_stats(self):
        return self._stats(self.switches)


@dataclass
class ComparisonTable:
    """Regime x island matrix of credits and switches over seeds."""

    domain: str
    seeds: list[int]
    cells: dict[str, dict[int, Cell]]
    summaries: dict[str, list[RunSummary]]

    @property
    def regimes(self):
        return list(self.cells)

    def to_dict(self) -> dict:
        out = {"domain": self.domain, "seeds": self.seeds, "regimes": {}}
        for regime, row in self.cells.items():
            out["regimes"][regime] = {
                str(i): {
                    "credits_mean": c.credits_stats[0], "credits_std": c.credits_stats[1],
                    "switches_mean": c.switches_stats[0], "switches_std": c.switches_stats[1],
                }
                for i, c in row.items()
            }
        return out

    def to_text(self) -> str:
        islands = sorted({i for row in self.cells.values() for i in row})
        head = f"{'regime':<18}" + "".join(f"{f'I{i} credits':>21}{'switches':>16}" for i in islands)
        title = self.domain
        if self.seeds:
            title += f": {len(self.seeds)} seed(s) {self.seeds[0]}..{self.seeds[-1]}"
        lines = [title, head]
        for regime, row in self.cells.items():
            parts = [f"{regime:<18}"]
            for i in islands:
                (cm, cs), (sm, ss) = row[i].credits_stats, row[i].switches_stats
                parts.append(f"{cm:>10.1f} ± {cs:<8.1f}{sm:>7.1f} ± {ss:<6.1f}")
            lines.append("".join(parts).rstrip())
        return "\n".join(lines)


def _run_summary(config):
    return run_experiment(config)[1]


def compare_regimes(configs, seeds) -> ComparisonTable:
    """Run every config under every seed and tabulate per-island results."""
    configs = list(configs)
    if not configs:
        raise ValueError("compare_regimes needs at least one config")
    domains = {c.domain for c in configs}
    if len(domains) > 1:
        raise ValueError(f"configs mix domains: {sorted(domains)}")
    shapes = {len(c.islands) for c in configs}
    if len(shapes) > 1:
        raise ValueError("configs differ in island count")
    names = [c.regime.name for c in configs]
    if len(set(names)) != len(names):
        raise ValueError("configs must differ in regime")
    seeds = list(seeds)
    order = sorted(configs, key=lambda c: REGIME_ORDER.index(c.regime.name))
    cells, summaries = {}, {}
    for cfg in order:
        runs = [_run_summary(cfg.replace(seed=s)) for s in seeds]
        summaries[cfg.regime.name] = runs
        cells[cfg.regime.name] = {
            i: Cell([r.islands[i].credits for r in runs], [r.islands[i].switches for r in runs])
            for i in range(1, len(cfg.islands) + 1)
        }
    return ComparisonTable(configs[0].domain, seeds, cells, summaries)


def all_regimes(config: ExperimentConfig) -> list[ExperimentConfig]:
    """``config`` under each of the four regimes (G regimes need a flagged island)."""
    out = []
    for name in REGIME_ORDER:
        regime = REGIMES[name]
        if regime.use_g_island and not config.g_islands:
            continue
        out.append(config.replace(regime=regime))
    return out
