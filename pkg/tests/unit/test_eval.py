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
import pytest

from fraudbench.data import Dataset, stratified_kfold
from fraudbench.errors import EvaluationError, FoldError
from fraudbench.eval import (
    EvalSettings,
    cross_validate,
    grid_points,
    grid_search,
    roc_auc_score,
    roc_curve,
    run_fold,
)
from fraudbench.registry import ModelSpec, knn
from tests.conftest import blobs, make_dataset


class _Constant:
    kind: ClassVar[str] = "constant"

    def __init__(self, **params: object) -> None:
        self.params = params

    def fit(self, data: Dataset) -> "_Constant":
        return self

    def score(self, rows: np.ndarray) -> np.ndarray:
        return np.zeros(len(rows))

    def to_dict(self) -> dict:
        return {}


class _FirstColumn:
    """Scores by the first feature, or its negation when ``flip``."""

    kind: ClassVar[str] = "first_column"

    def __init__(self, flip: bool = False, tag: str = "") -> None:
        self.flip = flip
        self.tag = tag
        self.seen = np.zeros((0, 0))

    def fit(self, data: Dataset) -> "_FirstColumn":
        self.seen = data.features.copy()
        return self

    def score(self, rows: np.ndarray) -> np.ndarray:
        column = np.asarray(rows)[:, 0]
        return -column if self.flip else column

    def to_dict(self) -> dict:
        return {"flip": self.flip}


class _Broken:
    kind: ClassVar[str] = "broken"

    def fit(self, data: Dataset) -> "_Broken":
        raise RuntimeError("boom")

    def score(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {}


CONSTANT = ModelSpec("constant", "supervised", "Scores every row zero.", _Constant)
FIRST_COLUMN = ModelSpec("first_column", "supervised", "Ranks by column one.", _FirstColumn)
BROKEN = ModelSpec("broken", "supervised", "Fails to fit.", _Broken)


def test_two_point_curve() -> None:
    curve = roc_curve([0.9, 0.1], [1, 0])
    assert curve.points == [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    assert curve.thresholds[0] == np.inf


def test_all_tied_scores_give_one_half() -> None:
    curve = roc_curve([0.3] * 6, [0, 1, 0, 1, 1, 0])
    assert curve.points == [(0.0, 0.0), (1.0, 1.0)]
    assert roc_auc_score([0.3] * 6, [0, 1, 0, 1, 1, 0]) == 0.5


def test_textbook_example() -> None:
    assert roc_auc_score([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)


def test_negated_scores_mirror_the_area() -> None:
    rng = np.random.default_rng(0)
    scores = rng.integers(0, 5, 200).astype(float)
    labels = np.r_[0, 1, rng.integers(0, 2, 198)]
    assert roc_auc_score(-scores, labels) == pytest.approx(1.0 - roc_auc_score(scores, labels))


@pytest.mark.parametrize("seed", range(500))
def test_area_equals_mann_whitney_statistic(seed: int) -> None:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    labels = np.r_[0, 1, rng.integers(0, 2, n - 2)]
    scores = rng.integers(0, 6, n).astype(float)
    pos, neg = scores[labels == 1], scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    assert roc_auc_score(scores, labels) == pytest.approx(wins / (pos.size * neg.size), abs=1e-12)


def test_monotone_transform_keeps_the_area() -> None:
    rng = np.random.default_rng(1)
    scores = rng.standard_normal(300)
    labels = np.r_[0, 1, rng.integers(0, 2, 298)]
    assert roc_auc_score(np.exp(scores), labels) == roc_auc_score(scores, labels)
    assert roc_auc_score(3.0 * scores - 7.0, labels) == roc_auc_score(scores, labels)


def test_random_labels_sit_near_one_half() -> None:
    rng = np.random.default_rng(2)
    scores = rng.standard_normal(10_000)
    labels = rng.integers(0, 2, 10_000)
    assert 0.45 <= roc_auc_score(scores, labels) <= 0.55


@pytest.mark.parametrize(
    "scores, labels",
    [
        ([0.1, 0.2], [1, 1]),
        ([0.1, np.nan], [0, 1]),
        ([0.1, 0.2, 0.3], [0, 1]),
        ([0.1, 0.2], [0, 2]),
    ],
)
def test_invalid_roc_input(scores: list[float], labels: list[int]) -> None:
    with pytest.raises(EvaluationError):
        roc_curve(scores, labels)


def test_constant_model_scores_one_half_per_fold() -> None:
    data = blobs(50, 2, 3.0, seed=0)
    result = cross_validate(CONSTANT, data, stratified_kfold(data, 5, seed=0))
    assert result.per_fold_auroc == [0.5] * 5
    assert result.pooled_auroc == 0.5
    assert result.mean == 0.5
    assert result.std == 0.0


def test_cross_validation_is_reproducible() -> None:
    data = blobs(60, 3, 1.0, seed=1)
    plan = stratified_kfold(data, 5, seed=3)
    a = cross_validate(knn, data, plan, seed=11)
    b = cross_validate(knn, data, plan, seed=11)
    parallel = cross_validate(knn, data, plan, seed=11, n_jobs=2)
    assert a == b
    assert parallel.per_fold_auroc == a.per_fold_auroc
    assert a.params == {"n_neighbors": 4}


def test_grid_points_iterate_sorted_keys() -> None:
    assert grid_points({"b": [1, 2], "a": [3]}) == [{"a": 3, "b": 1}, {"a": 3, "b": 2}]


def test_grid_search_single_point() -> None:
    data = blobs(30, 2, 3.0, seed=2)
    best, result, trials = grid_search(
        FIRST_COLUMN, {"flip": [False]}, data, stratified_kfold(data, 3, seed=0)
    )
    assert best == {"flip": False}
    assert len(trials) == 1 and trials[0] == result


def test_grid_search_picks_the_dominant_point() -> None:
    data = blobs(30, 2, 3.0, seed=2)
    best, result, trials = grid_search(
        FIRST_COLUMN, {"flip": [True, False]}, data, stratified_kfold(data, 3, seed=0)
    )
    assert best == {"flip": False}
    assert result.mean == max(t.mean for t in trials if t.mean is not None)


def test_grid_search_ties_go_to_the_first_point() -> None:
    data = blobs(30, 2, 3.0, seed=2)
    best, _, _ = grid_search(CONSTANT, {"x": [1, 2, 3]}, data, stratified_kfold(data, 3, seed=0))
    assert best == {"x": 1}


def test_zero_auroc_ties_go_to_the_first_point() -> None:
    rng = np.random.default_rng(3)
    features = np.r_[rng.uniform(0.0, 1.0, 30), rng.uniform(10.0, 11.0, 30)]
    labels = np.r_[np.zeros(30, np.int64), np.ones(30, np.int64)]
    data = make_dataset(features, labels)
    best, result, trials = grid_search(
        FIRST_COLUMN, {"flip": [True], "tag": ["a", "b"]}, data, stratified_kfold(data, 3, seed=0)
    )
    assert [t.mean for t in trials] == [0.0, 0.0]
    assert best == {"flip": True, "tag": "a"}
    assert result is trials[0]


def test_empty_grid_is_rejected() -> None:
    data = blobs(30, 2, 3.0, seed=2)
    with pytest.raises(EvaluationError):
        grid_search(CONSTANT, {}, data, stratified_kfold(data, 3, seed=0))


def test_test_rows_never_reach_the_fit() -> None:
    rng = np.random.default_rng(4)
    features = rng.standard_normal((80, 2)) * [100.0, 1.0]
    labels = np.r_[np.zeros(60, np.int64), np.ones(20, np.int64)]
    data = make_dataset(features, labels, names=["Amount", "V1"])
    plan = stratified_kfold(data, 4, seed=0)

    tampered = features.copy()
    tampered[plan.test_indices(0)] *= 1000.0
    other = make_dataset(tampered, labels, names=["Amount", "V1"])

    a = run_fold(FIRST_COLUMN, data, plan, 0, seed=5, settings=EvalSettings())
    b = run_fold(FIRST_COLUMN, other, plan, 0, seed=5, settings=EvalSettings())
    assert a.fit.scaler == b.fit.scaler
    np.testing.assert_array_equal(a.fit.model.seen, b.fit.model.seen)  # type: ignore[attr-defined]


def test_fit_failures_name_the_fold() -> None:
    data = blobs(30, 2, 3.0, seed=2)
    with pytest.raises(FoldError, match="Fold 0 failed: boom"):
        run_fold(BROKEN, data, stratified_kfold(data, 3, seed=0), 0)
