"""Multilayer perceptron: ReLU hidden layers, sigmoid output, mini-batch
gradient descent on mean binary cross-entropy."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig
from ..seeding import derive_seed
from .common import check_fit_inputs, check_score_inputs, sigmoid


@dataclass
class MlpConfig:
    hidden_layers: tuple[int, ...] = (64, 32)
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.1

    def __post_init__(self):
        self.hidden_layers = tuple(int(h) for h in self.hidden_layers)
        if not self.hidden_layers or any(h < 1 for h in self.hidden_layers):
            raise InvalidConfig("hidden_layers must be a non-empty list of positive sizes")
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidConfig("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidConfig("learning_rate must be > 0")


def init_params(n_features: int, hidden_layers: tuple[int, ...], seed: int):
    """Glorot-uniform weights (±sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    sizes = [n_features, *hidden_layers, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward(weights, biases, X):
    """Returns (activations per layer, pre-activations per layer, output)."""
    activations = [X]
    pre = []
    a = X
    last = len(weights) - 1
    for layer, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        pre.append(z)
        a = sigmoid(z) if layer == last else np.maximum(z, 0.0)
        activations.append(a)
    return activations, pre, activations[-1][:, 0]


def loss_and_gradients(weights, biases, X, y):
    """Mean binary cross-entropy and analytic gradients of every weight and
    bias. Exposed for finite-difference checks."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    activations, pre, p = _forward(weights, biases, X)
    eps = 1e-12
    loss = float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))
    grad_w = [np.zeros_like(W) for W in weights]
    grad_b = [np.zeros_like(b) for b in biases]
    delta = ((p - y) / n)[:, None]  # output-layer error for BCE + sigmoid
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (pre[layer - 1] > 0)
    return loss, grad_w, grad_b


class Mlp:
    def __init__(self, config: MlpConfig | None = None):
        self.config = config or MlpConfig()
        self.weights_: list[np.ndarray] = []
        self.biases_: list[np.ndarray] = []

    def parameter_count(self) -> int:
        return sum(W.size for W in self.weights_) + sum(b.size for b in self.biases_)

    def fit(self, X, y, seed: int = 0) -> "Mlp":
        X, y = check_fit_inputs(X, y)
        cfg = self.config
        self.weights_, self.biases_ = init_params(
            X.shape[1], cfg.hidden_layers, derive_seed(seed, "init")
        )
        rng = np.random.default_rng(derive_seed(seed, "shuffle"))
        n = len(y)
        for _ in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                batch = order[start : start + cfg.batch_size]
                _, grad_w, grad_b = loss_and_gradients(
                    self.weights_, self.biases_, X[batch], y[batch]
                )
                for layer in range(len(self.weights_)):
                    self.weights_[layer] -= cfg.learning_rate * grad_w[layer]
                    self.biases_[layer] -= cfg.learning_rate * grad_b[layer]
        return self

    def score(self, X) -> np.ndarray:
        X = check_score_inputs(X, self.weights_[0].shape[0])
        _, _, p = _forward(self.weights_, self.biases_, X)
        return p
