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

from typing import ClassVar

import numpy as np

from fraudbench.data import Dataset
from fraudbench.errors import DataError
from fraudbench.utils.typing import as_rows


class KNearestNeighbors:
    """Brute-force K nearest neighbours under Euclidean distance.

    The score is the fraud fraction among the K nearest training rows. Equal
    distances are ordered by training-row index.
    """

    kind: ClassVar[str] = "knn"

    def __init__(self, n_neighbors: int = 4, chunk_size: int = 256) -> None:
        if n_neighbors < 1:
            raise ValueError(f"n_neighbors must be positive, got {n_neighbors}")
        self.n_neighbors = n_neighbors
        self.chunk_size = chunk_size
        self.train_features = np.zeros((0, 0))
        self.train_labels = np.zeros(0, dtype=np.int64)

    def fit(self, data: Dataset) -> "KNearestNeighbors":
        if self.n_neighbors > data.n_rows:
            raise DataError(f"n_neighbors={self.n_neighbors} exceeds {data.n_rows} training rows")
        self.train_features = np.array(data.features)
        self.train_labels = np.array(data.labels)
        return self

    def neighbors(self, rows: np.ndarray) -> np.ndarray:
        """Indices of the K nearest training rows, nearest first."""
        rows = as_rows(rows, self.train_features.shape[1])
        out = np.empty((rows.shape[0], self.n_neighbors), dtype=np.int64)
        for start in range(0, rows.shape[0], self.chunk_size):
            chunk = rows[start : start + self.chunk_size]
            diff = chunk[:, None, :] - self.train_features[None, :, :]
            dist = np.einsum("qnd,qnd->qn", diff, diff)
            order = np.argsort(dist, axis=1, kind="stable")
            out[start : start + chunk.shape[0]] = order[:, : self.n_neighbors]
        return out

    def score(self, rows: np.ndarray) -> np.ndarray:
        return self.train_labels[self.neighbors(rows)].mean(axis=1)

    def predict(self, rows: np.ndarray) -> np.ndarray:
        return (self.score(rows) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "n_neighbors": self.n_neighbors,
            "train_features": self.train_features.tolist(),
            "train_labels": self.train_labels.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "KNearestNeighbors":
        model = cls(int(payload["n_neighbors"]))
        model.train_features = np.asarray(payload["train_features"], dtype=np.float64)
        model.train_labels = np.asarray(payload["train_labels"], dtype=np.int64)
        return model
