"""Random forest: bagged CART trees with per-split feature subsets."""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidConfig
from ..seeding import derive_seed
from .common import check_fit_inputs, check_score_inputs
from .tree import DecisionTree, TreeConfig


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_features: str | int = "sqrt"
    tree: TreeConfig = field(default_factory=TreeConfig)
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidConfig("n_trees must be >= 1")
        if isinstance(self.max_features, str):
            if self.max_features != "sqrt":
                raise InvalidConfig("max_features must be 'sqrt' or a positive integer")
        elif self.max_features < 1:
            raise InvalidConfig("max_features must be >= 1")


class RandomForest:
    """Mean of ``n_trees`` CART scores, each tree fit on a bootstrap sample
    with a deterministic per-tree seed."""

    def __init__(self, config: ForestConfig | None = None):
        self.config = config or ForestConfig()
        self.trees_: list[DecisionTree] = []

    def _resolve_max_features(self, d: int) -> int:
        mf = self.config.max_features
        if mf == "sqrt":
            return max(1, math.isqrt(d))
        if mf > d:
            raise InvalidConfig(f"max_features {mf} exceeds feature count {d}")
        return int(mf)

    def fit(self, X, y, seed: int = 0) -> "RandomForest":
        X, y = check_fit_inputs(X, y)
        n, d = X.shape
        max_features = self._resolve_max_features(d)
        self.trees_ = []
        for i in range(self.config.n_trees):
            tree_seed = derive_seed(seed, f"tree{i}")
            if self.config.bootstrap:
                rng = np.random.default_rng(derive_seed(tree_seed, "bootstrap"))
                idx = rng.integers(0, n, size=n)
            else:
                idx = np.arange(n)
            tree = DecisionTree(self.config.tree)
            tree.fit(
                X[idx],
                y[idx],
                seed=derive_seed(tree_seed, "splits"),
                max_features=max_features if max_features < d else None,
            )
            self.trees_.append(tree)
        return self

    def score(self, X) -> np.ndarray:
        X = check_score_inputs(X, self.trees_[0].n_features_)
        total = np.zeros(len(X))
        for tree in self.trees_:
            total += tree.score(X)
        return total / len(self.trees_)
