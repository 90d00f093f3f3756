"""Classification models with a minor-class score in [0, 1].

Three families are provided: a CART decision tree, brute-force k-nearest
neighbors, and L1-regularized logistic regression. ``fit`` selects
hyperparameters from the family grid by inner stratified cross-validation
maximizing PR-AUC, breaking ties toward the simpler model (shallower tree
with larger leaves, larger k, larger lam).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from ..datasets import Dataset, stratified_kfold
from ..errors import EmptyClass
from ..metrics import pr_auc
from .knn import KnnScorer, fit_knn
from .logreg import LogRegScorer, fit_logreg, logreg_objective_and_gradient, solve_l1_logreg
from .tree import TreeScorer, fit_tree

__all__ = [
    "Family",
    "ModelSpec",
    "TrainedScorer",
    "KnnScorer",
    "LogRegScorer",
    "TreeScorer",
    "default_grid",
    "simplest_params",
    "fit",
    "fit_with_params",
    "select_hyperparams",
    "score",
    "logreg_objective_and_gradient",
    "solve_l1_logreg",
]

log = logging.getLogger(__name__)

TrainedScorer = Union[TreeScorer, KnnScorer, LogRegScorer]


class Family(str, Enum):
    TREE = "tree"
    KNN = "knn"
    LOGREG = "logreg"


_TREE_GRID = tuple(
    {"max_depth": depth, "min_leaf": leaf} for depth in (2, 4, 6, 8, 12, 25) for leaf in (1, 5)
)
_KNN_GRID = tuple({"k": k} for k in (1, 3, 5, 7, 11, 15))
_LOGREG_GRID = tuple({"lam": lam} for lam in (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0))


def default_grid(family: Family) -> tuple[dict, ...]:
    return {Family.TREE: _TREE_GRID, Family.KNN: _KNN_GRID, Family.LOGREG: _LOGREG_GRID}[Family(family)]


def _simplicity_key(family: Family, params: dict) -> tuple:
    """Sort key putting the simplest (most regularized) candidate first."""
    if family is Family.TREE:
        return (params["max_depth"], -params["min_leaf"])
    if family is Family.KNN:
        return (-params["k"],)
    return (-params["lam"],)


@dataclass(frozen=True)
class ModelSpec:
    """Model family plus its hyperparameter grid and tuning configuration."""

    family: Family
    grid: tuple[dict, ...] = ()
    tuning_folds: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if not self.grid:
            object.__setattr__(self, "grid", default_grid(self.family))
        else:
            object.__setattr__(self, "grid", tuple(dict(p) for p in self.grid))
        if self.tuning_folds < 2:
            raise ValueError(f"tuning_folds must be at least 2, got {self.tuning_folds}")


def simplest_params(spec: ModelSpec) -> dict:
    """Fallback hyperparameters when tuning is not possible."""
    return dict(min(spec.grid, key=lambda p: _simplicity_key(spec.family, p)))


def fit_with_params(family: Family, params: dict, train: Dataset) -> TrainedScorer:
    """Fit one model with fixed hyperparameters; deterministic."""
    family = Family(family)
    if family is Family.TREE:
        return fit_tree(train, max_depth=params["max_depth"], min_leaf=params["min_leaf"])
    if family is Family.KNN:
        return fit_knn(train, k=params["k"])
    return fit_logreg(train, lam=params["lam"])


def select_hyperparams(
    spec: ModelSpec, pairs: Sequence[tuple[Dataset, Dataset]]
) -> tuple[dict, tuple[tuple[dict, float], ...]]:
    """Pick the grid point with the best mean validation PR-AUC.

    pairs are (train, validation) datasets, typically inner CV splits; the
    caller controls how they were built (in particular whether the training
    side was resampled). Ties go to the simpler candidate.
    """
    if not pairs:
        raise ValueError("need at least one (train, validation) pair")
    candidates = sorted(spec.grid, key=lambda p: _simplicity_key(spec.family, p))
    table = []
    best_params: dict | None = None
    best_q = -1.0
    for params in candidates:
        total = 0.0
        for train, val in pairs:
            scorer = fit_with_params(spec.family, params, train)
            total += pr_auc(scorer.score(val.features), val.labels)
        mean_q = total / len(pairs)
        table.append((dict(params), mean_q))
        if mean_q > best_q:
            best_params, best_q = dict(params), mean_q
    assert best_params is not None
    return best_params, tuple(table)


def fit(spec: ModelSpec, train: Dataset) -> TrainedScorer:
    """Tune hyperparameters by inner stratified CV on train, then refit.

    When either class has fewer elements than tuning_folds, tuning degrades
    to the simplest grid point (logged).
    """
    major, minor = train.class_counts()
    if minor == 0 or major == 0:
        raise EmptyClass("training data must contain both classes")
    if min(major, minor) < spec.tuning_folds:
        params = simplest_params(spec)
        log.warning(
            "class counts %d/%d below tuning_folds=%d; using default hyperparameters %s",
            major, minor, spec.tuning_folds, params,
        )
    elif len(spec.grid) == 1:
        params = dict(spec.grid[0])
    else:
        folds = stratified_kfold(train, spec.tuning_folds, spec.seed)
        pairs = [(train.subset(tr), train.subset(te)) for tr, te in folds]
        params, _ = select_hyperparams(spec, pairs)
    return fit_with_params(spec.family, params, train)


def score(model: TrainedScorer, X) -> np.ndarray:
    """Minor-class scores in [0, 1] for each row of X."""
    return model.score(X)
