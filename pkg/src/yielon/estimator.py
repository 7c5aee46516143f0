"""scikit-learn style wrapper around a single switching island.

``X`` is a performance matrix of shape ``(n_instances, n_algorithms)``:
``X[j, k]`` is the raw credit algorithm ``k`` earns on instance ``j``. The
selector streams the rows in order and only observes the column of the
algorithm it is currently running, exactly like an island fed by a domain.
"""
from __future__ import annotations

import copy

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .archipelago import CiaRegistry, IslandState, step_island
from .core import YieldParams


class _MatrixExecutor:
    def __init__(self, X, names, offset):
        self.X = X
        self.index = {name: k for k, name in enumerate(names)}
        self.offset = offset

    def run(self, island_id, algorithm, episode):
        return float(self.X[episode - self.offset, self.index[algorithm]]), "matrix"


class LatentYieldSelector(BaseEstimator):
    """Online algorithm selector driven by a Yielory.

    Parameters mirror :class:`yielon.core.YieldParams`; ``start`` is the
    column index of the initial algorithm.

    Attributes
    ----------
    active_ : int
        Column of the algorithm that will run on the next instance.
    selected_ : ndarray of int
        Column used on every instance seen so far.
    norm_credits_ : ndarray of float
        Normalized credit of every instance seen so far.
    yielons_ : ndarray of float
        Yielon count after every instance.
    n_switches_ : int
    """

    def __init__(self, upsilon_max=100.0, upsilon_min=30.0, upsilon_initial=60.0,
                 window_size=5, p=0.05, c_min_norm=80.0, epsilon=10.0, sigma_tol=0.5,
                 start=0, random_state=None):
        self.upsilon_max = upsilon_max
        self.upsilon_min = upsilon_min
        self.upsilon_initial = upsilon_initial
        self.window_size = window_size
        self.p = p
        self.c_min_norm = c_min_norm
        self.epsilon = epsilon
        self.sigma_tol = sigma_tol
        self.start = start
        self.random_state = random_state

    def _params(self):
        return YieldParams(
            upsilon_max=float(self.upsilon_max), upsilon_min=float(self.upsilon_min),
            upsilon_initial=float(self.upsilon_initial), window_size=self.window_size,
            p=float(self.p), c_min_norm=float(self.c_min_norm), epsilon=float(self.epsilon),
            sigma_tol=float(self.sigma_tol),
        )

    def _validate(self, X, reset):
        X = check_array(X, dtype=np.float64)
        if (X < 0).any():
            raise ValueError("raw credits must be non-negative")
        if reset:
            self.n_features_in_ = X.shape[1]
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} algorithms, selector was fitted with "
                             f"{self.n_features_in_}")
        return X

    def _init_state(self):
        params = self._params()
        if not 0 <= self.start < self.n_features_in_:
            raise ValueError(f"start={self.start} is not a valid column index")
        seed = int(check_random_state(self.random_state).randint(2**31 - 1))
        names = [str(k) for k in range(self.n_features_in_)]
        self._names = names
        self.island_ = IslandState(1, names, names[self.start], params=params,
                                   rng=np.random.default_rng(seed))
        self.registry_ = CiaRegistry([1])
        self.n_seen_ = 0
        self.selected_ = np.empty(0, dtype=int)
        self.norm_credits_ = np.empty(0)
        self.yielons_ = np.empty(0)

    def fit(self, X, y=None):
        X = self._validate(X, reset=True)
        self._init_state()
        return self._consume(X)

    def partial_fit(self, X, y=None):
        first = not hasattr(self, "island_")
        X = self._validate(X, reset=first)
        if first:
            self._init_state()
        return self._consume(X)

    def _consume(self, X):
        executor = _MatrixExecutor(X, self._names, self.n_seen_)
        params = self.island_.params
        selected, credits, yielons = [], [], []
        for j in range(X.shape[0]):
            rec = step_island(self.island_, self.registry_, executor, params, self.n_seen_ + j)
            selected.append(int(rec.algorithm))
            credits.append(rec.norm_credit)
            yielons.append(rec.yielons)
        self.n_seen_ += X.shape[0]
        self.selected_ = np.concatenate([self.selected_, np.asarray(selected, dtype=int)])
        self.norm_credits_ = np.concatenate([self.norm_credits_, credits])
        self.yielons_ = np.concatenate([self.yielons_, yielons])
        return self

    @property
    def active_(self) -> int:
        check_is_fitted(self, "island_")
        return int(self.island_.active)

    @property
    def n_switches_(self) -> int:
        check_is_fitted(self, "island_")
        return self.island_.switches

    def predict(self, X):
        """Columns the selector would run on the rows of ``X``.

        The stream continues from the fitted state on a copy; ``self`` is
        left untouched.
        """
        check_is_fitted(self, "island_")
        clone = copy.deepcopy(self)
        clone.partial_fit(X)
        return clone.selected_[self.n_seen_:]

    def score(self, X, y=None):
        """Mean normalized credit obtained while continuing on ``X``."""
        check_is_fitted(self, "island_")
        clone = copy.deepcopy(self)
        clone.partial_fit(X)
        return float(np.mean(clone.norm_credits_[self.n_seen_:]))
