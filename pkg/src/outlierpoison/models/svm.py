"""One-vs-rest SVM with a polynomial kernel, trained by an SMO-style dual solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier, ConvergenceError, check_matrix, softmax


@dataclass(frozen=True)
class SVMConfig:
    kernel: str = "poly"
    degree: int = 3
    c: float = 3.0
    gamma: float | None = None  # None resolves to 1 / (n_features * var(X))
    coef0: float = 0.0
    tol: float = 1e-3
    max_iter: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if self.kernel != "poly":
            raise ValueError("only the polynomial kernel is supported")
        if self.c <= 0:
            raise ValueError("regularization C must be positive")
        if self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")


def poly_kernel(a: np.ndarray, b: np.ndarray, gamma: float, coef0: float, degree: int) -> np.ndarray:
    return (gamma * (a @ b.T) + coef0) ** degree


def _solve_binary(kernel: np.ndarray, y: np.ndarray, c: float, tol: float, max_iter: int):
    """Maximize the dual sum(a) - a'Qa/2 with Q = yy'K, box [0, C], sum(a y) = 0.

    Pair selection is maximal-violation for i and second-order gain for j;
    each pair update solves its two-variable subproblem exactly, so the dual
    objective never decreases.
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the minimization form a'Qa/2 - sum(a)
    diag = np.diag(kernel).copy()
    objective = 0.0
    history = [0.0]
    violation = np.inf
    for _ in range(max_iter):
        minus_yg = -y * grad
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < c)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            violation = 0.0
            break
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = int(up_idx[np.argmax(minus_yg[up_idx])])
        m_up = minus_yg[i]
        m_low = float(minus_yg[low_idx].min())
        violation = m_up - m_low
        if violation < tol:
            break
        cand = low_idx[minus_yg[low_idx] < m_up]
        gap = m_up - minus_yg[cand]
        curv = np.maximum(diag[i] + diag[cand] - 2.0 * y[i] * y[cand] * kernel[i, cand], 1e-12)
        j = int(cand[np.argmin(-(gap * gap) / curv)])

        eta = max(diag[i] + diag[j] - 2.0 * kernel[i, j], 1e-12)
        err_i = y[i] * grad[i]
        err_j = y[j] * grad[j]
        ai_old, aj_old = alpha[i], alpha[j]
        aj = aj_old + y[j] * (err_i - err_j) / eta
        if y[i] != y[j]:
            lo_clip, hi_clip = max(0.0, aj_old - ai_old), min(c, c + aj_old - ai_old)
        else:
            lo_clip, hi_clip = max(0.0, ai_old + aj_old - c), min(c, ai_old + aj_old)
        aj = min(max(aj, lo_clip), hi_clip)
        ai = ai_old + y[i] * y[j] * (aj_old - aj)
        # snap float dust onto the box bounds so membership tests stay exact
        snap = 1e-12 * c
        ai = 0.0 if ai < snap else (c if ai > c - snap else ai)
        aj = 0.0 if aj < snap else (c if aj > c - snap else aj)
        d_i, d_j = ai - ai_old, aj - aj_old
        if d_i == 0.0 and d_j == 0.0:
            break  # numerically stalled; violation below reports the state
        q_ij = y[i] * y[j] * kernel[i, j]
        objective += (
            -d_i * grad[i]
            - d_j * grad[j]
            - 0.5 * (d_i * d_i * diag[i] + 2.0 * d_i * d_j * q_ij + d_j * d_j * diag[j])
        )
        history.append(objective)
        alpha[i], alpha[j] = ai, aj
        grad += (d_i * y[i]) * (y * kernel[:, i]) + (d_j * y[j]) * (y * kernel[:, j])

    if violation >= tol:
        raise ConvergenceError(
            f"SMO did not converge within {max_iter} pair updates (KKT violation {violation:.3g})"
        )

    minus_yg = -y * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(minus_yg[free].mean())
    else:
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < c)) | ((y > 0) & (alpha > 0))
        hi = minus_yg[up].max() if up.any() else 0.0
        lo = minus_yg[low].min() if low.any() else 0.0
        bias = float(0.5 * (hi + lo))
    return alpha, bias, violation, np.asarray(history)


class SVMClassifier(Classifier):
    family = "svm"

    def __init__(self, config: SVMConfig, x, y, n_classes, feature_names):
        super().__init__(config, n_classes, feature_names)
        if config.gamma is None:
            pooled_var = float(x.var())
            self.gamma_ = 1.0 / (x.shape[1] * pooled_var) if pooled_var > 0 else 1.0 / x.shape[1]
        else:
            self.gamma_ = float(config.gamma)
        kernel = poly_kernel(x, x, self.gamma_, config.coef0, config.degree)
        self.coefs_ = np.zeros((n_classes, len(x)))
        self.biases_ = np.zeros(n_classes)
        self.kkt_violations_ = np.zeros(n_classes)
        self.squared_weight_norms_ = np.zeros(n_classes)
        self.objective_histories_: list[np.ndarray] = []
        for cls in range(n_classes):
            target = np.where(y == cls, 1.0, -1.0)
            alpha, bias, violation, history = _solve_binary(
                kernel, target, config.c, config.tol, config.max_iter
            )
            coef = alpha * target
            self.coefs_[cls] = coef
            self.biases_[cls] = bias
            self.kkt_violations_[cls] = violation
            self.squared_weight_norms_[cls] = float(coef @ kernel @ coef)
            self.objective_histories_.append(history)
        self._remember_training_data(x, y)

    def decision_scores(self, x) -> np.ndarray:
        """Signed one-vs-rest margins, one column per class."""
        x = check_matrix(x, self.n_features)
        kernel = poly_kernel(x, self._train_x, self.gamma_, self.config.coef0, self.config.degree)
        return kernel @ self.coefs_.T + self.biases_

    def predict(self, x) -> np.ndarray:
        return np.argmax(self.decision_scores(x), axis=1)

    def predict_proba(self, x) -> np.ndarray:
        return softmax(self.decision_scores(x))

    def margin_score(self) -> float:
        """Smallest geometric margin 1/||w|| across the one-vs-rest subproblems."""
        norms = np.sqrt(np.clip(self.squared_weight_norms_, 0.0, None))
        if (norms <= 0.0).any():
            raise ValueError("degenerate subproblem: zero weight norm")
        return float((1.0 / norms).min())
