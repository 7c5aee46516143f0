import numpy as np
import pytest

from yielon.archipelago import CiaRegistry, IslandState, step_island
from yielon.baselines import REGIME_ORDER, REGIMES, RegimeConfig, Selector, greedy_select
from yielon.config import default_config
from yielon.core import YieldParams
from yielon.harness import run_experiment

P = YieldParams()


class Tripwire:
    def __getattr__(self, name):
        raise AssertionError(f"greedy mode touched .{name}")


class Fixed:
    def __init__(self, by_algo):
        self.by_algo = by_algo

    def run(self, island_id, algorithm, episode):
        return self.by_algo[algorithm], "p"


def make(i, active, rep=("a", "b", "c", "d"), g=False):
    return IslandState(i, list(rep), active, is_g_island=g, rng=np.random.default_rng(i))


def test_regime_table():
    assert list(REGIMES) == sorted(REGIMES, key=REGIME_ORDER.index)
    assert set(REGIMES) == set(REGIME_ORDER)
    for name, r in REGIMES.items():
        assert r.name == name and RegimeConfig.from_name(name) is r
        assert r.use_yielory == (r.selector is Selector.LATENT_YIELD)
    with pytest.raises(ValueError):
        RegimeConfig.from_name("nope")


def test_greedy_keeps_when_best():
    reg = CiaRegistry([1, 2])
    isl = make(1, "a")
    reg.report(1, "a", None, 90)
    reg.report(2, "b", None, 50)
    assert greedy_select(reg, isl) == ("a", "none")


def test_greedy_empty_registry_keeps():
    assert greedy_select(CiaRegistry([1]), make(1, "a")) == ("a", "none")


def test_greedy_switches_immediately_every_time():
    isl, other = make(1, "a"), make(2, "b")
    reg = CiaRegistry([1, 2])
    ex = Fixed({"a": 1.0, "b": 1.0})
    # island 2 reports first each round with a higher score, so island 1 follows at once
    isl.norm.maxima["a"] = 2.0
    step_island(other, reg, ex, P, 0, greedy=True)
    rec = step_island(isl, reg, ex, P, 0, greedy=True)
    assert rec.switch and rec.exploration == "extrinsic" and isl.active == "b"
    assert reg.entry(1).algorithm == "b"


def test_greedy_g_island_jumps_to_unused():
    reg = CiaRegistry([1, 2, 3])
    g = make(2, "b", g=True)
    reg.report(1, "a", None, 100)
    reg.report(3, "c", None, 10)
    g.norm.maxima["b"] = 10.0
    rec = step_island(g, reg, Fixed({"b": 1.0}), P, 0, greedy=True, g_enabled=True)
    assert rec.exploration == "g-special" and g.active == "d"


def test_greedy_never_reads_yielory():
    islands = [make(i, a) for i, a in zip((1, 2, 3), "abc")]
    islands[1].is_g_island = True
    for isl in islands:
        isl.yielory = Tripwire()
        isl.window = Tripwire()
    reg = CiaRegistry([1, 2, 3])
    rng = np.random.default_rng(0)

    class Noisy:
        def run(self, island_id, algorithm, episode):
            return float(rng.uniform(0.1, 1.0)), "p"

    for g_enabled in (False, True):
        for ep in range(50):
            for isl in islands:
                rec = step_island(isl, reg, Noisy(), P, ep, greedy=True, g_enabled=g_enabled)
                assert rec.yielons is None and rec.sigma is None
                assert reg.entry(isl.island_id).yielons is None


def test_greedy_g_regime_switches_often():
    cfg = default_config("sorting").replace(regime=REGIMES["no-yielory-g"], seed=1)
    _, summary = run_experiment(cfg)
    assert summary.islands[2].switches >= 100
