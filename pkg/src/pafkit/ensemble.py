"""Soft voting and stacked generalization over heterogeneous models."""

import numpy as np

from .errors import EmptyModelList, SingleClass, TooFewRows
from .evaluation import stratified_kfold
from .models.logreg import LogisticRegression, LogRegConfig
from .seeding import derive_seed


def soft_vote(models, X) -> np.ndarray:
    """Unweighted arithmetic mean of the members' scores."""
    if not models:
        raise EmptyModelList("soft_vote needs at least one fitted model")
    total = np.zeros(len(np.asarray(X)))
    for model in models:
        total += model.score(X)
    return total / len(models)


class VotingClassifier:
    """Fits each member (with derived seeds) and scores by soft voting."""

    def __init__(self, models: list):
        if not models:
            raise EmptyModelList("voting needs at least one member model")
        self.models = list(models)

    def fit(self, X, y, seed: int = 0) -> "VotingClassifier":
        for i, model in enumerate(self.models):
            model.fit(X, y, seed=derive_seed(seed, f"member{i}"))
        return self

    def score(self, X) -> np.ndarray:
        return soft_vote(self.models, X)


class StackedClassifier:
    """Stacking with out-of-fold meta-features.

    Meta-feature column j of row i is the score of base model j trained on
    every fold except the one containing i, so no base model ever scores a
    row it saw during training. The logistic meta-learner is fitted on
    those out-of-fold columns; base models are then refitted on the full
    data for inference. ``oof_features_`` keeps the meta-feature matrix so
    leakage probes can inspect it.
    """

    def __init__(
        self,
        base_models: list,
        meta_config: LogRegConfig | None = None,
        n_folds: int = 5,
    ):
        if not base_models:
            raise EmptyModelList("stacking needs at least one base model")
        self.base_models = list(base_models)
        self.meta_model = LogisticRegression(meta_config or LogRegConfig())
        self.n_folds = n_folds
        self.oof_features_: np.ndarray | None = None

    def fit(self, X, y, seed: int = 0) -> "StackedClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if len(y) < self.n_folds:
            raise TooFewRows(f"{len(y)} rows cannot fill {self.n_folds} folds")
        if len(np.unique(y)) < 2:
            raise SingleClass("stacking needs both classes")
        plan = stratified_kfold(y, self.n_folds, derive_seed(seed, "folds"))
        oof = np.zeros((len(y), len(self.base_models)))
        for fold in range(plan.n_folds):
            train_idx, test_idx = plan.fold_indices(fold)
            for j, base in enumerate(self.base_models):
                base.fit(
                    X[train_idx], y[train_idx], seed=derive_seed(seed, f"fold{fold}", f"base{j}")
                )
                oof[test_idx, j] = base.score(X[test_idx])
        self.oof_features_ = oof
        self.meta_model.fit(oof, y, seed=derive_seed(seed, "meta"))
        for j, base in enumerate(self.base_models):
            base.fit(X, y, seed=derive_seed(seed, "full", f"base{j}"))
        return self

    def score(self, X) -> np.ndarray:
        meta_features = np.column_stack([base.score(X) for base in self.base_models])
        return self.meta_model.score(meta_features)
