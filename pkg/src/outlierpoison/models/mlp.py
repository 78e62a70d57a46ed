"""Single-hidden-layer perceptron: rectified-linear units, softmax output, adaptive-moment updates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, check_matrix, softmax


@dataclass(frozen=True)
class MLPConfig:
    hidden_units: int = 100
    activation: str = "relu"
    solver: str = "adam"
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 200
    tol: float = 1e-4
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.activation != "relu":
            raise ValueError("only rectified-linear activation is supported")
        if self.solver != "adam":
            raise ValueError("only the adaptive-moment solver is supported")
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")


class _Adam:
    def __init__(self, shapes, lr):
        self.lr = lr
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        scale = self.lr * np.sqrt(1.0 - b2**self.t) / (1.0 - b1**self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= scale * m / (np.sqrt(v) + eps)


def _cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(log_norm - shifted[np.arange(len(labels)), labels]))


class MLPClassifier(Classifier):
    family = "mlp"

    def __init__(self, config: MLPConfig, x, y, n_classes, feature_names):
        super().__init__(config, n_classes, feature_names)
        n, d = x.shape
        h = config.hidden_units
        rng = np.random.default_rng([int(config.seed) & 0x7FFFFFFF, 0x317])
        limit = np.sqrt(6.0 / (d + h))
        self.w1 = rng.uniform(-limit, limit, size=(d, h))
        self.b1 = np.zeros(h)
        # zero output layer: an untrained net scores every class identically
        self.w2 = np.zeros((h, n_classes))
        self.b2 = np.zeros(n_classes)
        self.loss_history_: list[float] = []
        if config.max_epochs == 0:
            self._remember_training_data(x, y)
            return

        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y] = 1.0
        batch = min(config.batch_size, n)
        opt = _Adam([p.shape for p in (self.w1, self.b1, self.w2, self.b2)], config.learning_rate)
        best = np.inf
        flat_epochs = 0
        for _ in range(config.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                rows = order[start : start + batch]
                xb, tb = x[rows], onehot[rows]
                z1 = xb @ self.w1 + self.b1
                hidden = np.maximum(z1, 0.0)
                logits = hidden @ self.w2 + self.b2
                probs = softmax(logits)
                g_logits = (probs - tb) / len(rows)
                g_w2 = hidden.T @ g_logits
                g_b2 = g_logits.sum(axis=0)
                g_hidden = (g_logits @ self.w2.T) * (z1 > 0.0)
                g_w1 = xb.T @ g_hidden
                g_b1 = g_hidden.sum(axis=0)
                opt.step((self.w1, self.b1, self.w2, self.b2), (g_w1, g_b1, g_w2, g_b2))
            loss = _cross_entropy(self._logits(x), y)
            self.loss_history_.append(loss)
            if loss > best - config.tol:
                flat_epochs += 1
                if flat_epochs >= config.patience:
                    break
            else:
                flat_epochs = 0
            best = min(best, loss)
        self._remember_training_data(x, y)

    def _logits(self, x) -> np.ndarray:
        hidden = np.maximum(x @ self.w1 + self.b1, 0.0)
        return hidden @ self.w2 + self.b2

    def decision_scores(self, x) -> np.ndarray:
        """Pre-softmax activations, one column per class."""
        return self._logits(check_matrix(x, self.n_features))

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.decision_scores(x), axis=1)

    def predict_proba(self, x) -> np.ndarray:
        return softmax(self.decision_scores(x))
