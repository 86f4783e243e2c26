"""Base classifier families with a uniform fit/score contract."""

from .forest import ForestConfig, RandomForest
from .gbt import GbtConfig, GradientBoosting
from .logreg import LogisticRegression, LogRegConfig
from .mlp import Mlp, MlpConfig
from .tree import DecisionTree, TreeConfig

__all__ = [
    "DecisionTree",
    "ForestConfig",
    "GbtConfig",
    "GradientBoosting",
    "LogRegConfig",
    "LogisticRegression",
    "Mlp",
    "MlpConfig",
    "RandomForest",
    "TreeConfig",
]
