"""Shared input checks and numerics for the model families."""

import numpy as np

from ..errors import DimensionMismatch, EmptyInput


def check_fit_inputs(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] == 0:
        raise EmptyInput("cannot fit on zero rows")
    if y.ndim != 1 or len(y) != X.shape[0]:
        raise DimensionMismatch(f"y has shape {y.shape}, X has {X.shape[0]} rows")
    if not np.isfinite(X).all():
        raise DimensionMismatch("X contains non-finite values")
    if not np.isin(y, (0.0, 1.0)).all():
        raise DimensionMismatch("y must be binary (0/1)")
    return X, y


def check_score_inputs(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise DimensionMismatch(
            f"expected a matrix with {n_features} columns, got shape {X.shape}"
        )
    return X


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def mean_log_loss(y: np.ndarray, z: np.ndarray) -> float:
    """Mean binary cross-entropy given logits z (stable form)."""
    return float(np.mean(np.logaddexp(0.0, z) - y * z))
