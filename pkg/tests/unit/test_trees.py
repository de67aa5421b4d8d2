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

import math

import numpy as np
import pytest

from fraudbench.data import Dataset, stratified_kfold
from fraudbench.supervised import DecisionTree, GradientBoosting, RandomForest
from fraudbench.supervised.trees import Tree, entropy, fit_entropy_tree
from tests.conftest import blobs, make_dataset

XOR = make_dataset([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], [0, 1, 1, 0])


def _bits(n_fraud: int, n: int) -> float:
    out = 0.0
    for count in (n_fraud, n - n_fraud):
        if 0 < count < n:
            p = count / n
            out -= p * math.log2(p)
    return out


def _exhaustive_root_splits(x: np.ndarray, y: np.ndarray) -> list[tuple[float, int, float]]:
    n = y.size
    parent = _bits(int(y.sum()), n)
    out = []
    for f in range(x.shape[1]):
        values = sorted(set(x[:, f].tolist()))
        for lo, hi in zip(values, values[1:], strict=False):
            t = (lo + hi) / 2.0
            left = x[:, f] <= t
            n_left = int(left.sum())
            child = (
                n_left * _bits(int(y[left].sum()), n_left)
                + (n - n_left) * _bits(int(y[~left].sum()), n - n_left)
            ) / n
            out.append((parent - child, f, t))
    return out


def test_entropy_of_even_split_is_one_bit() -> None:
    assert float(entropy(5, 10)) == pytest.approx(1.0)
    assert float(entropy(0, 10)) == 0.0


def test_single_class_gives_one_leaf() -> None:
    data = make_dataset(np.arange(12.0).reshape(-1, 2), [1] * 6)
    model = DecisionTree().fit(data)
    assert model.tree is not None and model.tree.n_nodes == 1
    assert model.score([[100.0, -3.0]]).tolist() == [1.0]


def test_xor_needs_depth_two() -> None:
    deep = DecisionTree(max_depth=2, min_samples_leaf=1).fit(XOR)
    assert np.array_equal(deep.predict(XOR.features), XOR.labels)
    shallow = DecisionTree(max_depth=1, min_samples_leaf=1).fit(XOR)
    assert np.mean(shallow.predict(XOR.features) == XOR.labels) <= 0.75


def test_leaves_respect_min_samples_and_depth() -> None:
    data = blobs(100, 3, 1.0, seed=0)
    model = DecisionTree(max_depth=3, min_samples_leaf=6).fit(data)
    tree = model.tree
    assert tree is not None
    counts = tree.value[tree.is_leaf()].sum(axis=1)
    assert counts.min() >= 6
    assert tree.depth <= 3


@pytest.mark.parametrize("seed", range(200))
def test_root_split_matches_exhaustive_search(seed: int) -> None:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 13))
    x = rng.integers(0, 5, size=(n, int(rng.integers(1, 4)))).astype(np.float64)
    y = rng.integers(0, 2, size=n)
    tree = fit_entropy_tree(x, y, max_depth=1, min_samples_leaf=1)
    splits = _exhaustive_root_splits(x, y)
    if y.min() == y.max() or not splits:
        assert tree.n_nodes == 1
        return
    best = max(gain for gain, _, _ in splits)
    expected = min((f, t) for gain, f, t in splits if gain >= best - 1e-9)
    assert (int(tree.feature[0]), float(tree.threshold[0])) == expected


def test_tree_round_trip() -> None:
    model = DecisionTree().fit(blobs(40, 2, 1.0, seed=1))
    assert model.tree is not None
    back = Tree.from_dict(model.tree.to_dict())
    probe = np.random.default_rng(0).standard_normal((30, 2))
    np.testing.assert_array_equal(back.apply(probe), model.tree.apply(probe))


def _leaf(fraud: float) -> Tree:
    return Tree(
        np.array([-1]),
        np.array([0.0]),
        np.array([-1]),
        np.array([-1]),
        np.array([[1.0 - fraud, fraud]]),
        0,
    )


def test_forest_votes_and_score() -> None:
    data = make_dataset([[0.0], [1.0]], [0, 1])
    forest = RandomForest(n_estimators=3, oob_score=False).fit(data)
    forest.trees = [_leaf(1.0), _leaf(1.0), _leaf(0.0)]
    assert forest.score([0.5]).tolist() == pytest.approx([2.0 / 3.0])
    assert forest.predict([0.5]).tolist() == [1]


def test_degenerate_forest_equals_single_tree() -> None:
    data = blobs(60, 4, 1.0, seed=2)
    tree = DecisionTree(max_depth=3, min_samples_leaf=6).fit(data)
    forest = RandomForest(
        n_estimators=1,
        oob_score=False,
        max_depth=3,
        min_samples_leaf=6,
        max_features=None,
        bootstrap=False,
    ).fit(data)
    assert tree.tree is not None
    np.testing.assert_array_equal(forest.trees[0].feature, tree.tree.feature)
    np.testing.assert_array_equal(forest.trees[0].threshold, tree.tree.threshold)
    probe = np.random.default_rng(0).standard_normal((50, 4))
    np.testing.assert_array_equal(forest.score(probe), tree.score(probe))


def test_oob_score_tracks_cross_validated_accuracy() -> None:
    data = blobs(1000, 4, 0.8, seed=3)
    forest = RandomForest(n_estimators=30, seed=0).fit(data)
    assert forest.oob_score is not None

    plan = stratified_kfold(data, 5, seed=0)
    accuracies = []
    for fold in range(5):
        model = RandomForest(n_estimators=30, oob_score=False, seed=fold).fit(
            data.take(plan.train_indices(fold))
        )
        test = data.take(plan.test_indices(fold))
        accuracies.append(float(np.mean(model.predict(test.features) == test.labels)))
    assert abs(forest.oob_score - float(np.mean(accuracies))) <= 0.10


def test_forest_is_reproducible_for_a_seed() -> None:
    data = blobs(50, 3, 1.0, seed=4)
    a = RandomForest(n_estimators=5, seed=9).fit(data)
    b = RandomForest(n_estimators=5, seed=9).fit(data)
    probe = np.random.default_rng(0).standard_normal((20, 3))
    np.testing.assert_array_equal(a.score(probe), b.score(probe))
    assert a.tree_seeds == b.tree_seeds


def test_zero_rounds_score_one_half() -> None:
    model = GradientBoosting(n_rounds=0).fit(blobs(10, 2, 1.0, seed=0))
    assert model.score([[3.0, -1.0]]).tolist() == [0.5]


def test_single_newton_step_on_all_fraud() -> None:
    data = make_dataset(np.arange(8.0).reshape(-1, 2), [1, 1, 1, 1])
    model = GradientBoosting(learning_rate=1.0, n_rounds=1, reg_lambda=0.0).fit(data)
    assert model.trees[0].n_nodes == 1
    assert model.margin([[0.0, 0.0]])[0] == pytest.approx(2.0)
    assert model.score([[0.0, 0.0]])[0] == pytest.approx(0.8808, abs=1e-4)


def test_boosting_training_loss_never_increases() -> None:
    model = GradientBoosting(learning_rate=0.3, n_rounds=30).fit(blobs(100, 3, 1.0, seed=5))
    history = np.array(model.train_loss_history)
    assert history.size == 31
    assert np.all(np.diff(history) <= 1e-12)


def test_boosting_round_trip() -> None:
    model = GradientBoosting(n_rounds=10).fit(blobs(50, 3, 1.0, seed=6))
    back = GradientBoosting.from_dict(model.to_dict())
    probe = np.random.default_rng(7).standard_normal((100, 3))
    np.testing.assert_array_equal(back.score(probe), model.score(probe))


def _permuted(seed: int) -> tuple[Dataset, Dataset, np.ndarray]:
    data = blobs(80, 4, 1.0, seed=seed)
    order = np.random.default_rng(seed + 100).permutation(data.n_rows)
    probe = np.random.default_rng(seed + 200).standard_normal((200, 4))
    return data, data.take(order), probe


def test_tree_ignores_row_order() -> None:
    data, shuffled, probe = _permuted(10)
    a = DecisionTree(max_depth=None, min_samples_leaf=1).fit(data)
    b = DecisionTree(max_depth=None, min_samples_leaf=1).fit(shuffled)
    np.testing.assert_array_equal(a.score(probe), b.score(probe))


def test_forest_ignores_row_order() -> None:
    data, shuffled, probe = _permuted(11)
    a = RandomForest(n_estimators=15, seed=4).fit(data)
    b = RandomForest(n_estimators=15, seed=4).fit(shuffled)
    np.testing.assert_array_equal(a.score(probe), b.score(probe))
    assert a.oob_score == b.oob_score


def test_boosting_ignores_row_order() -> None:
    data, shuffled, probe = _permuted(12)
    a = GradientBoosting(n_rounds=20).fit(data)
    b = GradientBoosting(n_rounds=20).fit(shuffled)
    assert np.max(np.abs(a.score(probe) - b.score(probe))) < 1e-9


def test_forest_keeps_drawing_features_until_one_splits() -> None:
    rng = np.random.default_rng(5)
    signal = np.r_[rng.uniform(0.0, 1.0, 20), rng.uniform(2.0, 3.0, 20)]
    features = np.column_stack([np.ones(40), np.zeros(40), np.full(40, 7.0), signal])
    data = make_dataset(features, np.r_[np.zeros(20, np.int64), np.ones(20, np.int64)])
    forest = RandomForest(
        n_estimators=10, oob_score=False, max_depth=1, max_features=1, bootstrap=False, seed=0
    ).fit(data)
    assert [int(t.feature[0]) for t in forest.trees] == [3] * 10
    assert forest.score([[1.0, 0.0, 7.0, 2.5]]).tolist() == [1.0]
