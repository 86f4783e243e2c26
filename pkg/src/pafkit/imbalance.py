"""Class-rebalancing resamplers and boosting ensembles for imbalanced data.

SMOTE synthesizes minority rows by interpolating toward nearest minority
neighbors; random undersampling (RUS) thins the majority class. RUSBoost
and EasyEnsemble wrap a from-scratch discrete AdaBoost around per-round or
per-member undersamples.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, InvalidRatio, SingleClass, TooFewMinority
from .models.common import check_fit_inputs, check_score_inputs, sigmoid
from .models.tree import DecisionTree, TreeConfig
from .seeding import derive_seed

RESAMPLE_METHODS = ("none", "smote", "rus")


@dataclass
class ResampleSpec:
    """What to do about class imbalance before fitting.

    ``target_ratio`` is the desired minority/majority count ratio after
    resampling (1.0 = fully balanced).
    """

    method: str = "none"
    target_ratio: float = 1.0
    k_neighbors: int = 5

    def __post_init__(self):
        if self.method not in RESAMPLE_METHODS:
            raise InvalidConfig(f"method must be one of {RESAMPLE_METHODS}")
        if self.target_ratio <= 0:
            raise InvalidConfig("target_ratio must be > 0")
        if self.k_neighbors < 1:
            raise InvalidConfig("k_neighbors must be >= 1")


def _class_split(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of (minority, majority) rows; ties make class 1 minority."""
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if len(pos) <= len(neg):
        return pos, neg
    return neg, pos


def _nearest_minority_neighbors(X_min: np.ndarray, k: int) -> np.ndarray:
    """Row i gets the indices of its k nearest minority rows (Euclidean,
    self excluded), computed in chunks to bound memory."""
    n = len(X_min)
    neighbors = np.empty((n, k), dtype=np.int64)
    sq = (X_min**2).sum(axis=1)
    chunk = 512
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = sq[start:stop, None] - 2.0 * X_min[start:stop] @ X_min.T + sq[None, :]
        for i in range(start, stop):
            d2[i - start, i] = np.inf  # exclude self
        order = np.argsort(d2, axis=1, kind="stable")
        neighbors[start:stop] = order[:, :k]
    return neighbors


def smote(X, y, spec: ResampleSpec, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Append synthetic minority rows until minority/majority reaches the
    target ratio (rounded down).

    Each synthetic row is x + λ·(x_nn − x) for a random minority row x, a
    random pick x_nn among its k nearest minority neighbors, and λ uniform
    on [0,1] — so every synthetic point lies on a segment between two
    original minority rows. Originals are never modified or removed.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    minority_idx, majority_idx = _class_split(y)
    if len(minority_idx) < 2:
        raise TooFewMinority(
            f"SMOTE needs at least 2 minority rows, found {len(minority_idx)}"
        )
    target = math.floor(spec.target_ratio * len(majority_idx))
    n_new = target - len(minority_idx)
    if n_new <= 0:
        return X.copy(), y.copy()
    X_min = X[minority_idx]
    k = min(spec.k_neighbors, len(minority_idx) - 1)
    neighbors = _nearest_minority_neighbors(X_min, k)
    rng = np.random.default_rng(seed)
    base = rng.integers(0, len(X_min), size=n_new)
    pick = rng.integers(0, k, size=n_new)
    lam = rng.random(n_new)
    x0 = X_min[base]
    x1 = X_min[neighbors[base, pick]]
    synthetic = x0 + lam[:, None] * (x1 - x0)
    minority_label = y[minority_idx[0]]
    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(n_new, minority_label, dtype=np.int8)])
    return X_out, y_out


def random_undersample(X, y, spec: ResampleSpec, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Keep all minority rows plus a uniform without-replacement sample of
    round(minority/target_ratio) majority rows, preserving row order."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    minority_idx, majority_idx = _class_split(y)
    n_majority = int(math.floor(len(minority_idx) / spec.target_ratio + 0.5))
    if n_majority > len(majority_idx):
        raise InvalidRatio(
            f"need {n_majority} majority rows but only {len(majority_idx)} exist"
        )
    rng = np.random.default_rng(seed)
    sampled = rng.choice(majority_idx, size=n_majority, replace=False)
    keep = np.sort(np.concatenate([minority_idx, sampled]))
    return X[keep], y[keep]


@dataclass
class BoostConfig:
    n_estimators: int = 50
    base_tree: TreeConfig = field(default_factory=lambda: TreeConfig(max_depth=1))

    def __post_init__(self):
        if self.n_estimators < 1:
            raise InvalidConfig("n_estimators must be >= 1")


@dataclass
class BoostRound:
    """Diagnostics captured per boosting round (for tests and debugging)."""

    epsilon: float
    alpha: float
    weight_sum: float
    subsample_positives: int = 0
    subsample_negatives: int = 0


class AdaBoostClassifier:
    """Discrete AdaBoost on ±1 labels with weighted CART weak learners.

    Rounds with weighted error ε ≥ 0.5 stop the run; a perfect round
    (ε = 0) gets its stage weight from ε clamped to 1e-10 and also stops.
    ``score`` maps the margin Σαₜhₜ(x) through a sigmoid.
    """

    def __init__(self, config: BoostConfig | None = None):
        self.config = config or BoostConfig()
        self.stumps_: list[DecisionTree] = []
        self.alphas_: list[float] = []
        self.rounds_: list[BoostRound] = []

    def fit(self, X, y, seed: int = 0) -> "AdaBoostClassifier":
        X, y = check_fit_inputs(X, y)
        if y.min() == y.max():
            raise SingleClass("boosting needs both classes")
        n = len(y)
        ym = 2.0 * y - 1.0
        w = np.full(n, 1.0 / n)
        self.stumps_, self.alphas_, self.rounds_ = [], [], []
        for t in range(self.config.n_estimators):
            stump = DecisionTree(self.config.base_tree)
            stump.fit(X, y, seed=derive_seed(seed, f"round{t}"), sample_weight=w)
            h = np.where(stump.score(X) >= 0.5, 1.0, -1.0)
            epsilon = float(w[h != ym].sum())
            if epsilon >= 0.5:
                break
            alpha = 0.5 * math.log((1.0 - max(epsilon, 1e-10)) / max(epsilon, 1e-10))
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            w = w * np.exp(-alpha * ym * h)
            w = w / w.sum()
            self.rounds_.append(BoostRound(epsilon, alpha, float(w.sum())))
            if epsilon == 0.0:
                break
        return self

    def decision_function(self, X) -> np.ndarray:
        if not self.stumps_:
            return np.zeros(len(np.asarray(X)))
        X = check_score_inputs(X, self.stumps_[0].n_features_)
        margin = np.zeros(len(X))
        for stump, alpha in zip(self.stumps_, self.alphas_):
            margin += alpha * np.where(stump.score(X) >= 0.5, 1.0, -1.0)
        return margin

    def score(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))


MAX_REDRAWS = 5


class RusBoostClassifier(AdaBoostClassifier):
    """AdaBoost whose weak learner trains each round on a random
    undersample: every minority row, plus majority rows drawn without
    replacement proportionally to the current sample weights, sized by
    ``target_ratio``. Weighted error and weight updates always use the
    full training set. A round with ε ≥ 0.5 re-draws its subsample (up to
    a small cap) before giving up."""

    def __init__(self, config: BoostConfig | None = None, target_ratio: float = 1.0):
        super().__init__(config)
        if target_ratio <= 0:
            raise InvalidConfig("target_ratio must be > 0")
        self.target_ratio = target_ratio

    def fit(self, X, y, seed: int = 0) -> "RusBoostClassifier":
        X, y = check_fit_inputs(X, y)
        if y.min() == y.max():
            raise SingleClass("boosting needs both classes")
        n = len(y)
        ym = 2.0 * y - 1.0
        w = np.full(n, 1.0 / n)
        minority_idx, majority_idx = _class_split(y.astype(np.int8))
        n_majority = int(math.floor(len(minority_idx) / self.target_ratio + 0.5))
        if n_majority > len(majority_idx):
            raise InvalidRatio(
                f"need {n_majority} majority rows but only {len(majority_idx)} exist"
            )
        self.stumps_, self.alphas_, self.rounds_ = [], [], []
        for t in range(self.config.n_estimators):
            accepted = None
            for redraw in range(MAX_REDRAWS):
                rng = np.random.default_rng(derive_seed(seed, f"round{t}", f"draw{redraw}"))
                p = w[majority_idx] / w[majority_idx].sum()
                sampled = rng.choice(majority_idx, size=n_majority, replace=False, p=p)
                subset = np.sort(np.concatenate([minority_idx, sampled]))
                sub_w = w[subset]
                stump = DecisionTree(self.config.base_tree)
                stump.fit(
                    X[subset],
                    y[subset],
                    seed=derive_seed(seed, f"round{t}", "stump"),
                    sample_weight=sub_w / sub_w.sum(),
                )
                h = np.where(stump.score(X) >= 0.5, 1.0, -1.0)
                epsilon = float(w[h != ym].sum())
                if epsilon < 0.5:
                    accepted = (stump, h, epsilon, subset)
                    break
            if accepted is None:
                break
            stump, h, epsilon, subset = accepted
            alpha = 0.5 * math.log((1.0 - max(epsilon, 1e-10)) / max(epsilon, 1e-10))
            self.stumps_.append(stump)
            self.alphas_.append(alpha)
            w = w * np.exp(-alpha * ym * h)
            w = w / w.sum()
            self.rounds_.append(
                BoostRound(
                    epsilon,
                    alpha,
                    float(w.sum()),
                    subsample_positives=int(y[subset].sum()),
                    subsample_negatives=int(len(subset) - y[subset].sum()),
                )
            )
            if epsilon == 0.0:
                break
        return self


class EasyEnsembleClassifier:
    """Mean of independent AdaBoost members, each trained on its own
    balanced uniform undersample of the majority class."""

    def __init__(self, config: BoostConfig | None = None, n_subsets: int = 10):
        if n_subsets < 1:
            raise InvalidConfig("n_subsets must be >= 1")
        self.config = config or BoostConfig()
        self.n_subsets = n_subsets
        self.members_: list[AdaBoostClassifier] = []
        self.member_sizes_: list[int] = []

    def fit(self, X, y, seed: int = 0) -> "EasyEnsembleClassifier":
        X, y = check_fit_inputs(X, y)
        if y.min() == y.max():
            raise SingleClass("boosting needs both classes")
        spec = ResampleSpec(method="rus", target_ratio=1.0)
        self.members_, self.member_sizes_ = [], []
        for i in range(self.n_subsets):
            X_sub, y_sub = random_undersample(
                X, y, spec, seed=derive_seed(seed, f"subset{i}", "rus")
            )
            member = AdaBoostClassifier(self.config)
            member.fit(X_sub, y_sub, seed=derive_seed(seed, f"subset{i}", "boost"))
            self.members_.append(member)
            self.member_sizes_.append(len(y_sub))
        return self

    def score(self, X) -> np.ndarray:
        total = np.zeros(len(np.asarray(X)))
        for member in self.members_:
            total += member.score(X)
        return total / len(self.members_)
