"""Logistic regression trained by full-batch gradient descent."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig
from .common import check_fit_inputs, check_score_inputs, mean_log_loss, sigmoid


@dataclass
class LogRegConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidConfig("learning_rate must be > 0")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1")
        if self.l2 < 0:
            raise InvalidConfig("l2 must be >= 0")


def loss_and_gradients(w, b, X, y, l2: float = 0.0):
    """Mean binary cross-entropy plus (l2/2)·‖w‖² (bias unregularized),
    with its analytic gradients. Exposed for finite-difference checks."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = len(y)
    z = X @ w + b
    loss = mean_log_loss(y, z) + 0.5 * l2 * float(w @ w)
    residual = sigmoid(z) - y
    grad_w = X.T @ residual / n + l2 * w
    grad_b = float(residual.mean())
    return loss, grad_w, grad_b


class LogisticRegression:
    """score(x) = sigmoid(w·x + b); w, b start at zero."""

    def __init__(self, config: LogRegConfig | None = None):
        self.config = config or LogRegConfig()
        self.weights_: np.ndarray | None = None
        self.bias_: float = 0.0

    def fit(self, X, y, seed: int = 0) -> "LogisticRegression":
        X, y = check_fit_inputs(X, y)
        cfg = self.config
        w = np.zeros(X.shape[1])
        b = 0.0
        for _ in range(cfg.epochs):
            _, grad_w, grad_b = loss_and_gradients(w, b, X, y, cfg.l2)
            w -= cfg.learning_rate * grad_w
            b -= cfg.learning_rate * grad_b
        self.weights_ = w
        self.bias_ = b
        return self

    def score(self, X) -> np.ndarray:
        X = check_score_inputs(X, len(self.weights_))
        return sigmoid(X @ self.weights_ + self.bias_)
