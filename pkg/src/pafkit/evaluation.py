"""Thresholding, confusion metrics, ROC/AUC, threshold sweeps, stratified
cross-validation, and grid search."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyGrid,
    InvalidConfig,
    SchemaMismatch,
    LengthMismatch,
    SingleClass,
    TooFewPerClass,
)
from .seeding import derive_seed


def apply_threshold(scores, t: float) -> np.ndarray:
    """Predict 1 iff score >= t (inclusive rule)."""
    return (np.asarray(scores, dtype=np.float64) >= t).astype(np.int8)


@dataclass
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(y, yhat) -> ConfusionMatrix:
    y = np.asarray(y, dtype=np.int8)
    yhat = np.asarray(yhat, dtype=np.int8)
    if len(y) != len(yhat):
        raise LengthMismatch(f"y has {len(y)} rows, predictions have {len(yhat)}")
    return ConfusionMatrix(
        tp=int(((y == 1) & (yhat == 1)).sum()),
        fp=int(((y == 0) & (yhat == 1)).sum()),
        fn=int(((y == 1) & (yhat == 0)).sum()),
        tn=int(((y == 0) & (yhat == 0)).sum()),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def precision(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fp)


def recall(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn)


def accuracy(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp + cm.tn, cm.total)


def f1_from_pr(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r else 0.0


def f1(cm: ConfusionMatrix) -> float:
    return f1_from_pr(precision(cm), recall(cm))


@dataclass
class RocCurve:
    """Points are (fpr, tpr, threshold), starting at (0,0) and ending at
    (1,1); tied scores collapse into a single point."""

    points: list[tuple[float, float, float]]


def roc_curve(y, scores) -> RocCurve:
    y = np.asarray(y, dtype=np.int8)
    scores = np.asarray(scores, dtype=np.float64)
    if len(y) != len(scores):
        raise LengthMismatch(f"y has {len(y)} rows, scores have {len(scores)}")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs at least one row of each class")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_y = y[order]
    points = [(0.0, 0.0, math.inf)]
    tp = fp = 0
    i = 0
    n = len(y)
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            j += 1
        tp += int((sorted_y[i:j] == 1).sum())
        fp += int((sorted_y[i:j] == 0).sum())
        points.append((fp / n_neg, tp / n_pos, float(sorted_scores[i])))
        i = j
    return RocCurve(points)


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve over fpr."""
    area = 0.0
    for (x0, y0, _), (x1, y1, _) in zip(curve.points, curve.points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


@dataclass
class MetricsRow:
    algorithm: str
    adjustments: str
    threshold: float
    precision: float
    recall: float
    f1: float
    accuracy: float


METRICS_COLUMNS = ("algorithm", "adjustments", "threshold", "precision", "recall", "f1", "accuracy")

OBJECTIVES = ("max_f1", "max_recall_with_precision_floor")


@dataclass
class SweepResult:
    rows: list[MetricsRow]
    best_threshold: float
    floor_met: bool = True


def sweep_thresholds(
    y,
    scores,
    grid,
    objective: str = "max_f1",
    precision_floor: float | None = None,
    algorithm: str = "",
    adjustments: str = "",
) -> SweepResult:
    """Score every threshold in the grid and pick the best one.

    ``max_f1`` maximizes F1. ``max_recall_with_precision_floor`` maximizes
    recall among thresholds whose precision reaches the floor; if none
    does, it falls back to the max-precision threshold and flags the
    result (``floor_met=False``). Ties always resolve to the lowest
    threshold.
    """
    grid = [float(t) for t in grid]
    if not grid:
        raise EmptyGrid("threshold grid is empty")
    if any(not 0.0 <= t <= 1.0 for t in grid):
        raise InvalidConfig("thresholds must lie in [0,1]")
    if objective not in OBJECTIVES:
        raise InvalidConfig(f"unknown objective {objective!r}; use one of {OBJECTIVES}")
    if objective == "max_recall_with_precision_floor" and precision_floor is None:
        raise InvalidConfig("max_recall_with_precision_floor needs a precision_floor")

    rows = []
    for t in grid:
        cm = confusion(y, apply_threshold(scores, t))
        rows.append(
            MetricsRow(
                algorithm=algorithm,
                adjustments=adjustments,
                threshold=t,
                precision=precision(cm),
                recall=recall(cm),
                f1=f1(cm),
                accuracy=accuracy(cm),
            )
        )

    by_threshold = sorted(rows, key=lambda r: r.threshold)
    floor_met = True
    if objective == "max_f1":
        best = _argmax(by_threshold, lambda r: r.f1)
    else:
        eligible = [r for r in by_threshold if r.precision >= precision_floor]
        if eligible:
            best = _argmax(eligible, lambda r: r.recall)
        else:
            floor_met = False
            best = _argmax(by_threshold, lambda r: r.precision)
    return SweepResult(rows=rows, best_threshold=best.threshold, floor_met=floor_met)


def _argmax(rows, key):
    best = rows[0]
    for row in rows[1:]:
        if key(row) > key(best):
            best = row
    return best


@dataclass
class CvPlan:
    n_folds: int
    seed: int
    fold_of: np.ndarray  # fold index per row

    def fold_indices(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.fold_of == fold)
        train = np.flatnonzero(self.fold_of != fold)
        return train, test


def stratified_kfold(labels, n_folds: int, seed: int) -> CvPlan:
    """Assign each row to one of n_folds folds, round-robin within each
    class after a seeded shuffle, so per-fold class counts differ from the
    overall proportions by at most one sample."""
    y = np.asarray(labels)
    if n_folds < 2:
        raise InvalidConfig(f"n_folds must be >= 2, got {n_folds}")
    rng = np.random.default_rng(seed)
    fold_of = np.full(len(y), -1, dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < n_folds:
            raise TooFewPerClass(
                f"class {cls} has {len(idx)} rows, fewer than {n_folds} folds"
            )
        perm = rng.permutation(idx)
        fold_of[perm] = np.arange(len(perm)) % n_folds
    return CvPlan(n_folds=n_folds, seed=seed, fold_of=fold_of)


@dataclass
class FoldMetrics:
    fold: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    auc: float


@dataclass
class CvResult:
    folds: list[FoldMetrics]
    mean_f1: float
    sd_f1: float
    mean_auc: float
    sd_auc: float


def _apply_resample(X, y, spec, seed: int):
    """Dispatch a resampling spec; kept as a module-level seam so tests can
    instrument exactly which rows a resampler sees."""
    if spec is None or spec.method == "none":
        return X, y
    from . import imbalance

    if spec.method == "smote":
        return imbalance.smote(X, y, spec, seed)
    if spec.method == "rus":
        return imbalance.random_undersample(X, y, spec, seed)
    raise InvalidConfig(f"unknown resampling method {spec.method!r}")


def cross_validate(model, X, y, plan: CvPlan, resample=None, seed: int = 0) -> CvResult:
    """Fit and score the model on every fold of the plan.

    Only the training portion of each fold is ever resampled; held-out
    rows reach the model untouched. Fold metrics use threshold 0.5.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    folds: list[FoldMetrics] = []
    for fold in range(plan.n_folds):
        train_idx, test_idx = plan.fold_indices(fold)
        X_tr, y_tr = _apply_resample(
            X[train_idx], y[train_idx], resample, derive_seed(seed, f"fold{fold}", "resample")
        )
        model.fit(X_tr, y_tr, seed=derive_seed(seed, f"fold{fold}", "fit"))
        scores = model.score(X[test_idx])
        cm = confusion(y[test_idx], apply_threshold(scores, 0.5))
        folds.append(
            FoldMetrics(
                fold=fold,
                precision=precision(cm),
                recall=recall(cm),
                f1=f1(cm),
                accuracy=accuracy(cm),
                auc=auc(roc_curve(y[test_idx], scores)),
            )
        )
    f1s = np.array([f.f1 for f in folds])
    aucs = np.array([f.auc for f in folds])
    return CvResult(
        folds=folds,
        mean_f1=float(f1s.mean()),
        sd_f1=float(f1s.std()),
        mean_auc=float(aucs.mean()),
        sd_auc=float(aucs.std()),
    )


@dataclass
class GridPoint:
    params: dict
    mean_f1: float
    sd_f1: float


@dataclass
class GridSearchResult:
    best_params: dict
    points: list[GridPoint]


def grid_search(build, grid: dict, X, y, plan: CvPlan, resample=None, seed: int = 0) -> GridSearchResult:
    """Evaluate every combination of the grid by cross-validation.

    ``build(**params)`` must return an unfitted model. The selection
    metric is mean F1 at threshold 0.5; ties keep the first combination
    in enumeration order (sorted parameter names, values in given order).
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise EmptyGrid("hyperparameter grid is empty")
    names = sorted(grid)
    points: list[GridPoint] = []
    best: GridPoint | None = None
    for combo in itertools.product(*(grid[name] for name in names)):
        params = dict(zip(names, combo))
        result = cross_validate(build(**params), X, y, plan, resample=resample, seed=seed)
        point = GridPoint(params=params, mean_f1=result.mean_f1, sd_f1=result.sd_f1)
        points.append(point)
        if best is None or point.mean_f1 > best.mean_f1:
            best = point
    return GridSearchResult(best_params=dict(best.params), points=points)


# --- delimited exports -----------------------------------------------------


def write_metrics_csv(rows: list[MetricsRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(METRICS_COLUMNS) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        r.algorithm,
                        r.adjustments,
                        repr(float(r.threshold)),
                        repr(float(r.precision)),
                        repr(float(r.recall)),
                        repr(float(r.f1)),
                        repr(float(r.accuracy)),
                    ]
                )
                + "\n"
            )


def read_metrics_csv(path) -> list[MetricsRow]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != ",".join(METRICS_COLUMNS):
        raise SchemaMismatch(f"{path}: not a metrics CSV")
    rows = []
    for line in lines[1:]:
        alg, adj, t, p, r, f, a = line.split(",")
        rows.append(
            MetricsRow(alg, adj, float(t), float(p), float(r), float(f), float(a))
        )
    return rows


def write_roc_csv(curve: RocCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("threshold,fpr,tpr\n")
        for fpr, tpr, threshold in curve.points:
            fh.write(f"{repr(float(threshold))},{repr(float(fpr))},{repr(float(tpr))}\n")


def read_roc_csv(path) -> RocCurve:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "threshold,fpr,tpr":
        raise SchemaMismatch(f"{path}: not a ROC CSV")
    points = []
    for line in lines[1:]:
        t, fpr, tpr = line.split(",")
        points.append((float(fpr), float(tpr), float(t)))
    return RocCurve(points)


def write_scores_csv(y, scores, path) -> None:
    """Held-out labels and model scores, one row per instance."""
    y = np.asarray(y)
    scores = np.asarray(scores, dtype=np.float64)
    if len(y) != len(scores):
        raise LengthMismatch(f"{len(y)} labels vs {len(scores)} scores")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("label,score\n")
        for label, score in zip(y, scores):
            fh.write(f"{int(label)},{repr(float(score))}\n")


def read_scores_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "label,score":
        raise SchemaMismatch(f"{path}: not a scores CSV")
    labels, scores = [], []
    for line in lines[1:]:
        label, score = line.split(",")
        labels.append(int(label))
        scores.append(float(score))
    return np.asarray(labels, dtype=np.int8), np.asarray(scores, dtype=np.float64)
