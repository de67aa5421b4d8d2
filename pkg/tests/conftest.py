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

from collections.abc import Sequence

import numpy as np
import pytest

from fraudbench.data import Dataset


def make_dataset(
    features: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[int] | np.ndarray,
    names: Sequence[str] | None = None,
) -> Dataset:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features.reshape(-1, 1)
    names = tuple(names) if names is not None else tuple(f"V{i + 1}" for i in range(features.shape[1]))
    return Dataset(features, np.asarray(labels), names)


def gaussian_normals(n: int, dims: int, seed: int, shift: float = 0.0) -> Dataset:
    rng = np.random.default_rng(seed)
    return make_dataset(shift + rng.standard_normal((n, dims)), np.zeros(n, dtype=np.int64))


def blobs(n_per_class: int, dims: int, separation: float, seed: int) -> Dataset:
    """Normals around the origin, frauds around ``separation`` on every axis."""
    rng = np.random.default_rng(seed)
    features = np.vstack(
        [
            rng.standard_normal((n_per_class, dims)),
            separation + rng.standard_normal((n_per_class, dims)),
        ]
    )
    labels = np.r_[np.zeros(n_per_class, np.int64), np.ones(n_per_class, np.int64)]
    return make_dataset(features, labels)


@pytest.fixture
def normals_500() -> Dataset:
    return gaussian_normals(500, 4, seed=0)
