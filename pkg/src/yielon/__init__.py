"""Latent-yield adaptive algorithm switching over an archipelago of islands."""
from .archipelago import CiaRegistry, EpisodeRecord, IslandState, step_island
from .baselines import REGIMES, RegimeConfig, Selector, greedy_select
from .config import ExperimentConfig, default_config, load_config
from .estimator import LatentYieldSelector
from .core import (
    CreditWindow,
    Decision,
    DecisionKind,
    NormalizationState,
    YieldParams,
    Yielory,
    decide,
    delta_test,
    normalize_credit,
    squeezing_factor,
    update_yielons,
)
from .harness import RunSummary, compare_regimes, run_experiment, write_outputs

__version__ = "0.1.0"
