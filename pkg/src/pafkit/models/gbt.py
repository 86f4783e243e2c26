"""Second-order (Newton) gradient-boosted trees on logistic loss."""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig, SingleClass
from .common import check_fit_inputs, check_score_inputs, mean_log_loss, sigmoid
from .tree import Node


@dataclass
class GbtConfig:
    n_rounds: int = 100
    shrinkage: float = 0.1
    max_depth: int = 3
    lam: float = 1.0  # L2 penalty on leaf weights
    gamma: float = 0.0  # minimum gain to accept a split
    min_child_weight: float = 1.0  # minimum hessian sum per child

    def __post_init__(self):
        if self.n_rounds < 1:
            raise InvalidConfig("n_rounds must be >= 1")
        if not 0.0 < self.shrinkage <= 1.0:
            raise InvalidConfig("shrinkage must be in (0,1]")
        if self.max_depth < 1:
            raise InvalidConfig("max_depth must be >= 1")
        if self.lam < 0 or self.gamma < 0 or self.min_child_weight < 0:
            raise InvalidConfig("lam, gamma and min_child_weight must be >= 0")


def leaf_weight(grad_sum: float, hess_sum: float, lam: float) -> float:
    """Newton-optimal leaf value −ΣG/(ΣH+λ)."""
    return -grad_sum / (hess_sum + lam)


def split_gain(gl: float, hl: float, gr: float, hr: float, lam: float, gamma: float) -> float:
    """Loss reduction of splitting a node into (gl,hl) and (gr,hr)."""
    parent = (gl + gr) ** 2 / (hl + hr + lam)
    return 0.5 * (gl**2 / (hl + lam) + gr**2 / (hr + lam) - parent) - gamma


def _build_round_tree(X, g, h, cfg: GbtConfig) -> Node:
    def build(idx: np.ndarray, depth: int) -> Node:
        gs = float(g[idx].sum())
        hs = float(h[idx].sum())
        leaf = Node(score=leaf_weight(gs, hs, cfg.lam))
        if depth >= cfg.max_depth or len(idx) < 2:
            return leaf
        best = None  # (gain, feature, threshold)
        for feature in range(X.shape[1]):
            values = X[idx, feature]
            order = np.argsort(values, kind="stable")
            vs = values[order]
            cg = np.cumsum(g[idx][order])
            ch = np.cumsum(h[idx][order])
            cut = np.flatnonzero(vs[:-1] != vs[1:])
            if len(cut) == 0:
                continue
            gl = cg[cut]
            hl = ch[cut]
            gr = gs - gl
            hr = hs - hl
            gain = 0.5 * (
                gl**2 / (hl + cfg.lam)
                + gr**2 / (hr + cfg.lam)
                - (gs**2) / (hs + cfg.lam)
            ) - cfg.gamma
            gain[(hl < cfg.min_child_weight) | (hr < cfg.min_child_weight)] = -np.inf
            k = int(np.argmax(gain))
            if gain[k] > 0 and (best is None or gain[k] > best[0]):
                threshold = (vs[cut[k]] + vs[cut[k] + 1]) / 2.0
                best = (float(gain[k]), feature, float(threshold))
        if best is None:
            return leaf
        _, feature, threshold = best
        mask = X[idx, feature] <= threshold
        node = Node(feature=feature, threshold=threshold, score=leaf.score)
        node.left = build(idx[mask], depth + 1)
        node.right = build(idx[~mask], depth + 1)
        return node

    return build(np.arange(len(g)), 0)


def _tree_values(node: Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X))
    stack = [(node, np.arange(len(X)))]
    while stack:
        current, idx = stack.pop()
        if len(idx) == 0:
            continue
        if current.is_leaf:
            out[idx] = current.score
        else:
            mask = X[idx, current.feature] <= current.threshold
            stack.append((current.left, idx[mask]))
            stack.append((current.right, idx[~mask]))
    return out


class GradientBoosting:
    """Additive log-odds model: F₀ is the base-rate log-odds, each round
    adds a shrunken regression tree fit to logistic gradients/hessians.
    ``loss_trace_`` records the mean training log-loss after every round."""

    def __init__(self, config: GbtConfig | None = None):
        self.config = config or GbtConfig()
        self.base_score_: float = 0.0
        self.trees_: list[Node] = []
        self.loss_trace_: list[float] = []
        self.n_features_: int = 0

    def fit(self, X, y, seed: int = 0) -> "GradientBoosting":
        X, y = check_fit_inputs(X, y)
        if y.min() == y.max():
            raise SingleClass("gradient boosting needs both classes")
        cfg = self.config
        self.n_features_ = X.shape[1]
        p_bar = float(y.mean())
        self.base_score_ = math.log(p_bar / (1.0 - p_bar))
        F = np.full(len(y), self.base_score_)
        self.trees_ = []
        self.loss_trace_ = [mean_log_loss(y, F)]
        for _ in range(cfg.n_rounds):
            p = sigmoid(F)
            g = p - y
            h = p * (1.0 - p)
            tree = _build_round_tree(X, g, h, cfg)
            self.trees_.append(tree)
            F = F + cfg.shrinkage * _tree_values(tree, X)
            self.loss_trace_.append(mean_log_loss(y, F))
        return self

    def decision_function(self, X) -> np.ndarray:
        X = check_score_inputs(X, self.n_features_)
        F = np.full(len(X), self.base_score_)
        for tree in self.trees_:
            F += self.config.shrinkage * _tree_values(tree, X)
        return F

    def score(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))
