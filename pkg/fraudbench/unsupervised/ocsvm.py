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

"""One-class SVM with an RBF kernel, trained by SMO on the dual."""

import logging
from collections import OrderedDict
from typing import ClassVar

import numpy as np

from fraudbench.data import Dataset
from fraudbench.unsupervised.base import require_normals
from fraudbench.utils.typing import as_rows

logger = logging.getLogger(__name__)


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * |a_i - b_j|^2) for every pair of rows."""
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * a @ b.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


class _KernelColumns:
    """Kernel columns K[:, i] computed on demand, with an LRU cache."""

    def __init__(self, x: np.ndarray, gamma: float, capacity: int) -> None:
        self.x = x
        self.gamma = gamma
        self.capacity = capacity
        self.sq_norms = (x * x).sum(axis=1)
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def __getitem__(self, i: int) -> np.ndarray:
        col = self._cache.get(i)
        if col is not None:
            self._cache.move_to_end(i)
            return col
        sq = self.sq_norms + self.sq_norms[i] - 2.0 * (self.x @ self.x[i])
        col = np.exp(-self.gamma * np.maximum(sq, 0.0))
        col[i] = 1.0
        self._cache[i] = col
        if len(self._cache) > self.capacity:
            self._cache.popitem(last=False)
        return col


class OneClassSvm:
    """Nu-formulation one-class SVM.

    Internally the dual is solved with box [0, 1] and sum nu * n (tolerance
    ``tol`` on that scale); the stored coefficients are rescaled to
    0 <= alpha <= 1 / (nu * n) with sum 1. ``score = rho - sum alpha k(sv, x)``
    is positive outside the learned boundary.
    """

    kind: ClassVar[str] = "ocsvm"

    def __init__(
        self,
        nu: float = 0.1,
        gamma: float = 0.001,
        tol: float = 1e-3,
        max_iter: int = 1_000_000,
        max_train: int | None = 20_000,
        cache_columns: int = 1024,
        seed: int = 0,
    ) -> None:
        if not 0.0 < nu <= 1.0:
            raise ValueError(f"nu must lie in (0, 1], got {nu}")
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        self.nu = nu
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.max_train = max_train
        self.cache_columns = cache_columns
        self.seed = seed
        self.support_vectors = np.zeros((0, 0))
        self.alpha = np.zeros(0)
        self.rho = 0.0
        self.n_train = 0
        self.n_iter = 0
        self.converged = False

    def fit(self, data: Dataset) -> "OneClassSvm":
        require_normals(data, self.kind)
        x = data.features
        if self.max_train is not None and data.n_rows > self.max_train:
            rng = np.random.default_rng(self.seed)
            x = x[np.sort(rng.choice(data.n_rows, size=self.max_train, replace=False))]
            logger.info(f"OCSVM subsampled {data.n_rows} normals to {self.max_train}")
        n = x.shape[0]
        total = self.nu * n
        beta = np.zeros(n)
        n_full = min(int(total), n)
        beta[:n_full] = 1.0
        if n_full < n:
            beta[n_full] = total - n_full

        kernel = _KernelColumns(x, self.gamma, self.cache_columns)
        active = np.flatnonzero(beta > 0)
        grad = np.zeros(n)  # K beta
        for start in range(0, active.size, 512):
            block = active[start : start + 512]
            grad += rbf_kernel(x, x[block], self.gamma) @ beta[block]

        self.converged = False
        it = 0
        for it in range(1, self.max_iter + 1):
            score = -grad
            up = beta < 1.0
            low = beta > 0.0
            if not (np.any(up) and np.any(low)):
                self.converged = True
                break
            i = int(np.flatnonzero(up)[np.argmax(score[up])])
            j = int(np.flatnonzero(low)[np.argmin(score[low])])
            gap = score[i] - score[j]
            if gap < self.tol:
                self.converged = True
                break
            ki, kj = kernel[i], kernel[j]
            curvature = max(ki[i] + kj[j] - 2.0 * ki[j], 1e-12)
            lam = min(gap / curvature, 1.0 - beta[i], beta[j])
            beta[i] += lam
            beta[j] -= lam
            grad += lam * (ki - kj)
        self.n_iter = it
        if not self.converged:
            logger.warning(f"OCSVM SMO reached the iteration cap ({self.max_iter})")

        beta = np.clip(beta, 0.0, 1.0)
        free = (beta > 0) & (beta < 1)
        if np.any(free):
            rho = float(grad[free].mean())
        else:
            # rho lies between the largest bounded-above and smallest at-zero gradient
            bounds = [grad[beta > 0].max()] if np.any(beta > 0) else []
            bounds += [grad[beta < 1].min()] if np.any(beta < 1) else []
            rho = float(np.mean(bounds))

        support = beta > 0
        self.support_vectors = np.array(x[support])
        self.alpha = beta[support] / total
        self.rho = rho / total
        self.n_train = n
        return self

    def decision_values(self, rows: np.ndarray) -> np.ndarray:
        """sum alpha k(sv, x) - rho; negative outside the boundary."""
        rows = as_rows(rows, self.support_vectors.shape[1])
        out = np.empty(rows.shape[0])
        for start in range(0, rows.shape[0], 2048):
            chunk = rows[start : start + 2048]
            out[start : start + chunk.shape[0]] = rbf_kernel(chunk, self.support_vectors, self.gamma) @ self.alpha
        return out - self.rho

    def score(self, rows: np.ndarray) -> np.ndarray:
        return -self.decision_values(rows)

    @property
    def upper_bound(self) -> float:
        return 1.0 / (self.nu * self.n_train)

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "gamma": self.gamma,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "max_train": self.max_train,
            "seed": self.seed,
            "support_vectors": self.support_vectors.tolist(),
            "alpha": self.alpha.tolist(),
            "rho": self.rho,
            "n_train": self.n_train,
            "n_iter": self.n_iter,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "OneClassSvm":
        model = cls(
            payload["nu"],
            payload["gamma"],
            payload["tol"],
            payload["max_iter"],
            payload["max_train"],
            seed=payload["seed"],
        )
        model.support_vectors = np.asarray(payload["support_vectors"], dtype=np.float64)
        model.alpha = np.asarray(payload["alpha"], dtype=np.float64)
        model.rho = float(payload["rho"])
        model.n_train = int(payload["n_train"])
        model.n_iter = int(payload["n_iter"])
        model.converged = bool(payload["converged"])
        return model
