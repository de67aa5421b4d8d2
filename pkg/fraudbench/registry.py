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

"""The ten benchmarked models, declared once with their shipped defaults."""

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

from fraudbench.data import PCA_COLUMNS
from fraudbench.errors import ConfigError
from fraudbench.supervised import (
    DecisionTree,
    GradientBoosting,
    KNearestNeighbors,
    LinearSvm,
    LogisticRegression,
    RandomForest,
)
from fraudbench.unsupervised import (
    AdversarialDetector,
    AutoEncoder,
    GaussianBernoulliRbm,
    OneClassSvm,
)
from fraudbench.utils.typing import ScoredModel, Track


@dataclass(frozen=True)
class ModelSpec:
    """How to build one benchmarked model.

    ``feature_columns`` restricts the model to a column subset (those present
    in the data); ``None`` means every column.
    """

    name: str
    track: Track
    description: str
    factory: Callable[..., ScoredModel]
    defaults: Mapping[str, Any] = field(default_factory=dict)
    grid: Mapping[str, list[Any]] = field(default_factory=dict)
    feature_columns: tuple[str, ...] | None = None
    seeded: bool = False

    def build(self, params: Mapping[str, Any] | None = None, seed: int = 0) -> ScoredModel:
        kwargs = {**self.defaults, **(params or {})}
        if self.seeded:
            kwargs.setdefault("seed", seed)
        return self.factory(**kwargs)


# --- Supervised track: trained on downsampled, balanced folds ---

lr = ModelSpec(
    name="lr",
    track="supervised",
    description="L1-penalised logistic regression.",
    factory=LogisticRegression,
    defaults={"C": 0.1},
    grid={"C": [0.01, 0.1, 1.0, 10.0]},
)

knn = ModelSpec(
    name="knn",
    track="supervised",
    description="K nearest neighbours; score is the fraud fraction among them.",
    factory=KNearestNeighbors,
    defaults={"n_neighbors": 4},
    grid={"n_neighbors": [2, 3, 4, 5, 6, 7]},
)

svm = ModelSpec(
    name="svm",
    track="supervised",
    description="Linear soft-margin SVM; score is the signed margin.",
    factory=LinearSvm,
    defaults={"C": 0.5},
    grid={"C": [0.1, 0.5, 1.0, 5.0]},
)

dt = ModelSpec(
    name="dt",
    track="supervised",
    description="Entropy decision tree.",
    factory=DecisionTree,
    defaults={"max_depth": 3, "min_samples_leaf": 6},
    grid={"max_depth": [2, 3, 4, 5], "min_samples_leaf": [5, 6, 7]},
)

rf = ModelSpec(
    name="rf",
    track="supervised",
    description="Random forest of bootstrapped entropy trees.",
    factory=RandomForest,
    defaults={"n_estimators": 30, "oob_score": True},
    grid={"n_estimators": [10, 30, 100]},
    seeded=True,
)

xgb = ModelSpec(
    name="xgb",
    track="supervised",
    description="Second-order gradient boosted trees on the log loss.",
    factory=GradientBoosting,
    defaults={"learning_rate": 0.4, "max_depth": 4},
    grid={"learning_rate": [0.1, 0.2, 0.4], "max_depth": [3, 4, 5]},
)

# --- Unsupervised track: trained on the normal rows of each fold ---

ocsvm = ModelSpec(
    name="ocsvm",
    track="unsupervised",
    description="One-class SVM with an RBF kernel.",
    factory=OneClassSvm,
    defaults={"nu": 0.1, "gamma": 0.001},
    grid={"nu": [0.05, 0.1, 0.2], "gamma": [0.0001, 0.001, 0.01]},
    seeded=True,
)

rbm = ModelSpec(
    name="rbm",
    track="unsupervised",
    description="Gaussian-Bernoulli RBM scored by free energy.",
    factory=GaussianBernoulliRbm,
    defaults={"learning_rate": 0.0005, "n_hidden": 10},
    grid={"learning_rate": [0.0005, 0.001, 0.005], "n_hidden": [5, 10, 20]},
    seeded=True,
)

ae = ModelSpec(
    name="ae",
    track="unsupervised",
    description="Dense auto-encoder scored by reconstruction 2-norm.",
    factory=AutoEncoder,
    grid={"bottleneck": [8, 12, 16]},
    seeded=True,
)

gan = ModelSpec(
    name="gan",
    track="unsupervised",
    description="Encoder/generator/discriminator triple scored by reconstruction and D.",
    factory=AdversarialDetector,
    grid={"alpha": [0.5, 0.9]},
    feature_columns=PCA_COLUMNS,
    seeded=True,
)

MODELS: tuple[ModelSpec, ...] = (lr, knn, svm, dt, rf, xgb, ocsvm, rbm, ae, gan)
ORDINALS: dict[str, int] = {spec.name: i for i, spec in enumerate(MODELS)}


def get_spec(name: str) -> ModelSpec:
    for spec in MODELS:
        if spec.name == name:
            return spec
    raise ConfigError(f"unknown model {name!r}; choose from {[s.name for s in MODELS]}")


def model_seed(master_seed: int, name: str) -> int:
    """Per-model seed: the master seed plus the model's fixed ordinal."""
    return master_seed + ORDINALS[get_spec(name).name]
