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

"""Gaussian-Bernoulli restricted Boltzmann machine scored by free energy."""

import logging
from typing import ClassVar

import numpy as np
from scipy.special import expit

from fraudbench.data import Dataset
from fraudbench.errors import TrainingDivergedError
from fraudbench.numkit import (
    DEFAULT_BATCH_SIZE,
    OptimizerState,
    decode_array,
    encode_array,
    minibatches,
    step,
)
from fraudbench.unsupervised.base import require_normals
from fraudbench.utils.typing import as_rows

logger = logging.getLogger(__name__)


class GaussianBernoulliRbm:
    """RBM with unit-variance Gaussian visibles and binary hiddens.

    Energy is ``0.5 * |x - b|^2 - c.h - x.W.h``. Training is CD-1 with a
    mean-field visible reconstruction; the anomaly score is the free energy.
    """

    kind: ClassVar[str] = "rbm"

    def __init__(
        self,
        learning_rate: float = 0.0005,
        n_hidden: int = 10,
        epochs: int = 20,
        batch_size: int = DEFAULT_BATCH_SIZE,
        init_scale: float = 0.01,
        seed: int = 0,
    ) -> None:
        if n_hidden < 1:
            raise ValueError(f"n_hidden must be positive, got {n_hidden}")
        self.learning_rate = learning_rate
        self.n_hidden = n_hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.init_scale = init_scale
        self.seed = seed
        self.weights = np.zeros((0, n_hidden))
        self.visible_bias = np.zeros(0)
        self.hidden_bias = np.zeros(n_hidden)
        self.reconstruction_history: list[float] = []

    def _init_params(self, n_visible: int, rng: np.random.Generator) -> None:
        self.weights = self.init_scale * rng.standard_normal((n_visible, self.n_hidden))
        self.visible_bias = np.zeros(n_visible)
        self.hidden_bias = np.zeros(self.n_hidden)

    def hidden_probabilities(self, rows: np.ndarray) -> np.ndarray:
        """p(h_j = 1 | x) = sigmoid(c_j + sum_i w_ij x_i)."""
        rows = as_rows(rows, self.visible_bias.size)
        return expit(self.hidden_bias + rows @ self.weights)

    def reconstruct(self, rows: np.ndarray) -> np.ndarray:
        """Mean-field reconstruction b + W p(h | x)."""
        return self.visible_bias + self.hidden_probabilities(rows) @ self.weights.T

    def free_energy(self, rows: np.ndarray) -> np.ndarray:
        """-log sum_h exp(-E(x, h)) up to a constant; higher is less likely.

        Args:
            rows: a single row or an (n, d) batch.

        Returns:
            ``0.5 |x - b|^2 - sum_j softplus(c_j + x . W_j)`` per row.
        """
        rows = as_rows(rows, self.visible_bias.size)
        quadratic = 0.5 * np.sum((rows - self.visible_bias) ** 2, axis=1)
        return quadratic - np.logaddexp(0.0, self.hidden_bias + rows @ self.weights).sum(axis=1)

    def reconstruction_error(self, rows: np.ndarray) -> float:
        rows = as_rows(rows, self.visible_bias.size)
        return float(np.mean((rows - self.reconstruct(rows)) ** 2))

    def _cd1_gradients(
        self, batch: np.ndarray, rng: np.random.Generator
    ) -> list[np.ndarray]:
        h0 = self.hidden_probabilities(batch)
        h0_sample = (rng.random(h0.shape) < h0).astype(np.float64)
        x1 = self.visible_bias + h0_sample @ self.weights.T
        h1 = self.hidden_probabilities(x1)
        n = batch.shape[0]
        # descent direction of the negative log-likelihood
        return [
            -(batch.T @ h0 - x1.T @ h1) / n,
            -(batch - x1).mean(axis=0),
            -(h0 - h1).mean(axis=0),
        ]

    def fit(self, data: Dataset) -> "GaussianBernoulliRbm":
        require_normals(data, self.kind)
        x = data.features
        rng = np.random.default_rng(self.seed)
        self._init_params(data.n_cols, rng)
        state = OptimizerState(kind="sgd", learning_rate=self.learning_rate)
        self.reconstruction_history = []
        for epoch in range(1, self.epochs + 1):
            for idx in minibatches(data.n_rows, self.batch_size, rng):
                grads = self._cd1_gradients(x[idx], rng)
                step([self.weights, self.visible_bias, self.hidden_bias], grads, state)
            if not all(
                np.all(np.isfinite(p))
                for p in (self.weights, self.visible_bias, self.hidden_bias)
            ):
                raise TrainingDivergedError(f"rbm: parameters became non-finite in epoch {epoch}")
            error = self.reconstruction_error(x)
            self.reconstruction_history.append(error)
            logger.debug(f"rbm epoch {epoch}: reconstruction error {error:.6f}")
        return self

    def score(self, rows: np.ndarray) -> np.ndarray:
        return self.free_energy(rows)

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "n_hidden": self.n_hidden,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "init_scale": self.init_scale,
            "seed": self.seed,
            "weights": encode_array(self.weights),
            "visible_bias": encode_array(self.visible_bias),
            "hidden_bias": encode_array(self.hidden_bias),
            "reconstruction_history": list(self.reconstruction_history),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GaussianBernoulliRbm":
        model = cls(
            payload["learning_rate"],
            payload["n_hidden"],
            payload["epochs"],
            payload["batch_size"],
            payload["init_scale"],
            payload["seed"],
        )
        model.weights = decode_array(payload["weights"])
        model.visible_bias = decode_array(payload["visible_bias"])
        model.hidden_bias = decode_array(payload["hidden_bias"])
        model.reconstruction_history = [float(v) for v in payload["reconstruction_history"]]
        return model
