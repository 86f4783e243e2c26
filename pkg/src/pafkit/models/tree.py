"""CART decision tree with Gini impurity and deterministic tie-breaking."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig
from .common import check_fit_inputs, check_score_inputs


@dataclass
class TreeConfig:
    max_depth: int | None = None  # None = unlimited
    min_samples_split: int = 2
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidConfig("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise InvalidConfig("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise InvalidConfig("min_samples_leaf must be >= 1")


@dataclass
class Node:
    feature: int = -1
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None
    score: float = 0.5

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def gini(positive_weight: float, total_weight: float) -> float:
    """Gini impurity of a node given its (weighted) positive share."""
    if total_weight <= 0:
        return 0.0
    p = positive_weight / total_weight
    return 2.0 * p * (1.0 - p)


def _best_split(X, y, w, idx, features, min_leaf):
    """Best (feature, threshold, impurity decrease) over candidate features.

    Thresholds sit at midpoints of consecutive distinct sorted values;
    rows with value <= threshold go left. Ties keep the lowest feature
    index, then the lowest threshold, via strict improvement in scan order.
    Zero-decrease splits are kept (a mixed node with distinct values always
    splits) so parity patterns like XOR are still separable at depth 2.
    """
    w_node = w[idx]
    y_node = y[idx]
    total_w = w_node.sum()
    parent = gini(float((w_node * y_node).sum()), float(total_w))
    n = len(idx)
    best = None  # (decrease, feature, threshold)
    for feature in features:
        values = X[idx, feature]
        order = np.argsort(values, kind="stable")
        vs = values[order]
        ws = w_node[order]
        wys = (w_node * y_node)[order]
        cut = np.flatnonzero(vs[:-1] != vs[1:])  # split after these positions
        if len(cut) == 0:
            continue
        left_n = cut + 1
        right_n = n - left_n
        ok = (left_n >= min_leaf) & (right_n >= min_leaf)
        if not ok.any():
            continue
        cw = np.cumsum(ws)
        cwy = np.cumsum(wys)
        wl = cw[cut]
        wyl = cwy[cut]
        wr = total_w - wl
        wyr = cwy[-1] - wyl
        with np.errstate(divide="ignore", invalid="ignore"):
            pl = np.where(wl > 0, wyl / wl, 0.0)
            pr = np.where(wr > 0, wyr / wr, 0.0)
        child = (wl * 2 * pl * (1 - pl) + wr * 2 * pr * (1 - pr)) / total_w
        decrease = parent - child
        decrease[~ok] = -np.inf
        k = int(np.argmax(decrease))
        if decrease[k] >= 0 and (best is None or decrease[k] > best[0]):
            threshold = (vs[cut[k]] + vs[cut[k] + 1]) / 2.0
            best = (float(decrease[k]), int(feature), float(threshold))
    return best


class DecisionTree:
    """Binary CART; leaf score = (weighted) positive fraction at the leaf.

    ``sample_weight`` generalizes the impurity and leaf scores for boosting;
    uniform weights reproduce the plain unweighted tree. ``max_features``
    draws a fresh random feature subset at every split (used by forests).
    """

    def __init__(self, config: TreeConfig | None = None):
        self.config = config or TreeConfig()
        self.root_: Node | None = None
        self.n_features_: int = 0

    def fit(self, X, y, seed: int = 0, sample_weight=None, max_features: int | None = None) -> "DecisionTree":
        X, y = check_fit_inputs(X, y)
        n, d = X.shape
        if sample_weight is None:
            w = np.ones(n)
        else:
            w = np.asarray(sample_weight, dtype=np.float64)
            if w.shape != (n,):
                raise InvalidConfig("sample_weight length must match rows")
            if (w < 0).any() or w.sum() <= 0:
                raise InvalidConfig("sample_weight must be non-negative with positive sum")
        if max_features is not None and not 1 <= max_features <= d:
            raise InvalidConfig(f"max_features must be in [1,{d}], got {max_features}")
        rng = np.random.default_rng(seed)
        cfg = self.config
        self.n_features_ = d

        def build(idx: np.ndarray, depth: int) -> Node:
            w_node = w[idx]
            total = float(w_node.sum())
            positive = float((w_node * y[idx]).sum())
            leaf_score = positive / total if total > 0 else 0.5
            leaf = Node(score=leaf_score)
            if cfg.max_depth is not None and depth >= cfg.max_depth:
                return leaf
            if len(idx) < cfg.min_samples_split or gini(positive, total) == 0.0:
                return leaf
            if max_features is not None and max_features < d:
                features = np.sort(rng.choice(d, size=max_features, replace=False))
            else:
                features = np.arange(d)
            found = _best_split(X, y, w, idx, features, cfg.min_samples_leaf)
            if found is None:
                return leaf
            _, feature, threshold = found
            mask = X[idx, feature] <= threshold
            node = Node(feature=feature, threshold=threshold, score=leaf_score)
            node.left = build(idx[mask], depth + 1)
            node.right = build(idx[~mask], depth + 1)
            return node

        self.root_ = build(np.arange(n), 0)
        return self

    def score(self, X) -> np.ndarray:
        X = check_score_inputs(X, self.n_features_)
        out = np.empty(len(X))
        stack = [(self.root_, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if len(idx) == 0:
                continue
            if node.is_leaf:
                out[idx] = node.score
            else:
                mask = X[idx, node.feature] <= node.threshold
                stack.append((node.left, idx[mask]))
                stack.append((node.right, idx[~mask]))
        return out

    def depth(self) -> int:
        def walk(node: Node) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root_)
