# Copyright 2026 The fraudbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""L1 logistic regression and the linear soft-margin SVM."""

import logging
from typing import ClassVar

import numpy as np
from scipy.special import expit

from fraudbench.data import Dataset
from fraudbench.errors import DataError
from fraudbench.utils.typing import as_rows

logger = logging.getLogger(__name__)


def logistic_loss(
    beta0: float, beta: np.ndarray, features: np.ndarray, labels: np.ndarray
) -> tuple[float, float, np.ndarray]:
    """Summed log loss of sigmoid(beta0 + X beta) and its gradient.

    Returns (loss, d/d beta0, d/d beta).
    """
    margin = beta0 + features @ beta
    loss = float(np.sum(np.logaddexp(0.0, margin) - labels * margin))
    residual = expit(margin) - labels
    return loss, float(residual.sum()), features.T @ residual


def soft_threshold(values: np.ndarray, threshold: float) -> np.ndarray:
    """Proximal operator of ``threshold * |.|``.

    Args:
        values: the point to shrink.
        threshold: non-negative shrinkage amount.

    Returns:
        ``sign(v) * max(|v| - threshold, 0)`` elementwise.
    """
    return np.sign(values) * np.maximum(np.abs(values) - threshold, 0.0)


class LogisticRegression:
    """Logistic regression with an L1 penalty of weight 1/C on the slopes.

    Solved by accelerated proximal gradient (FISTA with function-value
    restart); the intercept is not penalised.
    """

    kind: ClassVar[str] = "lr"

    def __init__(
        self, C: float = 0.1, max_iter: int = 20_000, tol: float = 1e-9
    ) -> None:
        if C <= 0:
            raise ValueError(f"C must be positive, got {C}")
        self.C = C
        self.max_iter = max_iter
        self.tol = tol
        self.beta0 = 0.0
        self.beta = np.zeros(0)
        self.n_iter = 0
        self.converged = False
        self.objective = np.inf

    @property
    def l1_strength(self) -> float:
        return 1.0 / self.C

    def _objective(self, theta: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
        loss, _, _ = logistic_loss(theta[0], theta[1:], x, y)
        return loss + self.l1_strength * float(np.abs(theta[1:]).sum())

    def _prox_step(self, theta: np.ndarray, x: np.ndarray, y: np.ndarray, lipschitz: float) -> np.ndarray:
        _, g0, g = logistic_loss(theta[0], theta[1:], x, y)
        out = np.empty_like(theta)
        out[0] = theta[0] - g0 / lipschitz
        out[1:] = soft_threshold(theta[1:] - g / lipschitz, self.l1_strength / lipschitz)
        return out

    def fit(self, data: Dataset) -> "LogisticRegression":
        x, y = data.features, data.labels.astype(np.float64)
        design = np.hstack([np.ones((data.n_rows, 1)), x])
        lipschitz = max(float(np.linalg.norm(design, 2)) ** 2 / 4.0, 1e-12)

        theta = np.zeros(data.n_cols + 1)
        current = self._objective(theta, x, y)
        best, best_value = theta.copy(), current
        momentum_point, t = theta.copy(), 1.0
        self.converged = False
        for it in range(1, self.max_iter + 1):
            candidate = self._prox_step(momentum_point, x, y, lipschitz)
            value = self._objective(candidate, x, y)
            if value > current:
                # restart momentum from the last accepted iterate
                candidate = self._prox_step(theta, x, y, lipschitz)
                value = self._objective(candidate, x, y)
                t = 1.0
            t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
            momentum_point = candidate + ((t - 1.0) / t_next) * (candidate - theta)
            change = float(np.max(np.abs(candidate - theta)))
            scale = max(1.0, float(np.max(np.abs(theta))))
            theta, current, t = candidate, value, t_next
            if current < best_value:
                best, best_value = theta.copy(), current
            if change <= self.tol * scale:
                self.converged = True
                break
        self.n_iter = it
        if not self.converged:
            logger.warning(
                f"LogisticRegression did not converge in {self.max_iter} iterations; "
                "keeping the best iterate"
            )
        self.beta0, self.beta, self.objective = float(best[0]), best[1:].copy(), best_value
        return self

    def score(self, rows: np.ndarray) -> np.ndarray:
        """Fraud probability sigmoid(beta0 + x . beta) per row."""
        return expit(self.beta0 + as_rows(rows, self.beta.size) @ self.beta)

    def predict(self, rows: np.ndarray) -> np.ndarray:
        return (self.score(rows) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "beta0": self.beta0,
            "beta": self.beta.tolist(),
            "n_iter": self.n_iter,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LogisticRegression":
        model = cls(payload["C"], payload["max_iter"], payload["tol"])
        model.beta0 = float(payload["beta0"])
        model.beta = np.asarray(payload["beta"], dtype=np.float64)
        model.n_iter = int(payload["n_iter"])
        model.converged = bool(payload["converged"])
        return model


class LinearSvm:
    """Soft-margin linear SVM trained by SMO on the dual.

    The working pair is the maximal KKT violating pair; training stops once
    the violation gap drops below ``tol``.
    """

    kind: ClassVar[str] = "svm"

    def __init__(self, C: float = 0.5, tol: float = 1e-3, max_iter: int = 200_000) -> None:
        if C <= 0:
            raise ValueError(f"C must be positive, got {C}")
        self.C = C
        self.tol = tol
        self.max_iter = max_iter
        self.w = np.zeros(0)
        self.b = 0.0
        self.alpha = np.zeros(0)
        self.support_indices = np.zeros(0, dtype=np.int64)
        self.n_iter = 0
        self.converged = False

    def fit(self, data: Dataset) -> "LinearSvm":
        x = data.features
        y = np.where(data.labels == 1, 1.0, -1.0)
        if np.all(y == y[0]):
            raise DataError("SVM training needs both classes")
        n, C = data.n_rows, self.C
        gram = x @ x.T
        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a

        self.converged = False
        it = 0
        for it in range(1, self.max_iter + 1):
            score = -y * grad
            up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
            low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
            i = int(np.flatnonzero(up)[np.argmax(score[up])])
            j = int(np.flatnonzero(low)[np.argmin(score[low])])
            gap = score[i] - score[j]
            if gap < self.tol:
                self.converged = True
                break
            curvature = max(gram[i, i] + gram[j, j] - 2.0 * gram[i, j], 1e-12)
            room_i = C - alpha[i] if y[i] > 0 else alpha[i]
            room_j = alpha[j] if y[j] > 0 else C - alpha[j]
            lam = min(gap / curvature, room_i, room_j)
            alpha[i] += y[i] * lam
            alpha[j] -= y[j] * lam
            grad += lam * y * (gram[:, i] - gram[:, j])
        self.n_iter = it
        if not self.converged:
            logger.warning(f"SMO reached the iteration cap ({self.max_iter}) before KKT tolerance")

        alpha = np.clip(alpha, 0.0, C)
        score = -y * grad
        free = (alpha > 0) & (alpha < C)
        if np.any(free):
            b = float(score[free].mean())
        else:
            up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
            low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
            b = float((score[up].max() + score[low].min()) / 2.0)

        self.alpha = alpha
        self.support_indices = np.flatnonzero(alpha > 0)
        self.w = x.T @ (alpha * y)
        self.b = b
        return self

    def kkt_violation(self, features: np.ndarray, labels: np.ndarray) -> float:
        """Largest breach of the soft-margin KKT conditions on the training set."""
        y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
        margin = y * self.score(features)
        at_zero = self.alpha <= 0
        at_c = self.alpha >= self.C
        free = ~(at_zero | at_c)
        breaches = np.concatenate(
            [
                np.maximum(1.0 - margin[at_zero], 0.0),
                np.maximum(margin[at_c] - 1.0, 0.0),
                np.abs(margin[free] - 1.0),
            ]
        )
        return float(breaches.max()) if breaches.size else 0.0

    def score(self, rows: np.ndarray) -> np.ndarray:
        """Signed distance-like margin of each row.

        Args:
            rows: a single row or an (n, d) batch.

        Returns:
            ``w . x + b`` per row; positive on the fraud side.
        """
        return as_rows(rows, self.w.size) @ self.w + self.b

    def predict(self, rows: np.ndarray) -> np.ndarray:
        return (self.score(rows) > 0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "w": self.w.tolist(),
            "b": self.b,
            "alpha": self.alpha.tolist(),
            "support_indices": self.support_indices.tolist(),
            "n_iter": self.n_iter,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LinearSvm":
        model = cls(payload["C"], payload["tol"], payload["max_iter"])
        model.w = np.asarray(payload["w"], dtype=np.float64)
        model.b = float(payload["b"])
        model.alpha = np.asarray(payload["alpha"], dtype=np.float64)
        model.support_indices = np.asarray(payload["support_indices"], dtype=np.int64)
        model.n_iter = int(payload["n_iter"])
        model.converged = bool(payload["converged"])
        return model
