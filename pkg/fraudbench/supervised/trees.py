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

"""Entropy decision trees, random forests and second-order boosted trees.

All three share one flat-array tree: node ``i`` is a leaf when
``left[i] == -1``; otherwise rows with ``x[feature[i]] <= threshold[i]`` go
left. Candidate thresholds are midpoints between consecutive distinct values.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import ClassVar, Literal

import numpy as np
from scipy.special import entr, expit

from fraudbench.data import Dataset
from fraudbench.numkit import spawn_seeds
from fraudbench.utils.typing import as_rows

logger = logging.getLogger(__name__)

_LN2 = np.log(2.0)
_GAIN_TOL = 1e-12

Split = tuple[float, int, float]  # (gain, feature, threshold)


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, k): class counts or a single leaf weight
    depth: int

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def is_leaf(self) -> np.ndarray:
        return self.left < 0

    def apply(self, rows: np.ndarray) -> np.ndarray:
        """Index of the leaf each row reaches."""
        node = np.zeros(rows.shape[0], dtype=np.int64)
        active = ~self.is_leaf()[node]
        while np.any(active):
            idx = np.flatnonzero(active)
            current = node[idx]
            goes_left = rows[idx, self.feature[current]] <= self.threshold[current]
            node[idx] = np.where(goes_left, self.left[current], self.right[current])
            active[idx] = ~self.is_leaf()[node[idx]]
        return node

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "depth": self.depth,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Tree":
        return cls(
            np.asarray(payload["feature"], dtype=np.int64),
            np.asarray(payload["threshold"], dtype=np.float64),
            np.asarray(payload["left"], dtype=np.int64),
            np.asarray(payload["right"], dtype=np.int64),
            np.asarray(payload["value"], dtype=np.float64),
            int(payload["depth"]),
        )


def _boundaries(sorted_values: np.ndarray) -> np.ndarray:
    """Positions i where a split falls between sorted_values[i] and [i + 1]."""
    return np.flatnonzero(sorted_values[:-1] < sorted_values[1:])


def _midpoint(lo: float, hi: float) -> float:
    mid = (lo + hi) / 2.0
    return lo if mid >= hi else mid


def grow_tree(
    n_rows: int,
    find_split: Callable[[np.ndarray, int], Split | None],
    leaf_value: Callable[[np.ndarray], np.ndarray],
    features: np.ndarray,
    max_depth: int | None,
) -> Tree:
    """Greedy top-down growth; ``find_split`` returns None to stop a node."""
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[np.ndarray] = []
    max_seen = 0

    def new_node(rows: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(leaf_value(rows))
        return len(feature) - 1

    stack = [(new_node(np.arange(n_rows)), np.arange(n_rows), 0)]
    while stack:
        node, rows, depth = stack.pop()
        max_seen = max(max_seen, depth)
        if max_depth is not None and depth >= max_depth:
            continue
        split = find_split(rows, depth)
        if split is None:
            continue
        _, f, t = split
        goes_left = features[rows, f] <= t
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        feature[node], threshold[node] = f, t
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.vstack(value),
        max_seen,
    )


def entropy(n_fraud: np.ndarray | float, n_total: np.ndarray | float) -> np.ndarray:
    """Binary entropy in bits of a node with ``n_fraud`` of ``n_total`` rows."""
    p = np.asarray(n_fraud, dtype=np.float64) / np.asarray(n_total, dtype=np.float64)
    return (entr(p) + entr(1.0 - p)) / _LN2


def best_entropy_split(
    features: np.ndarray,
    labels: np.ndarray,
    candidates: np.ndarray,
    min_samples_leaf: int,
) -> Split | None:
    """Highest information-gain split over ``candidates`` (ascending feature ids).

    Ties go to the lowest feature index, then the lowest threshold. An impure
    node takes its best valid split even when the gain is zero.
    """
    n = labels.size
    n_fraud = labels.sum()
    parent = float(entropy(n_fraud, n))
    if parent == 0.0 or n < 2 * min_samples_leaf:
        return None
    best: Split | None = None
    for f in candidates:
        order = np.argsort(features[:, f], kind="stable")
        values = features[order, f]
        cum_fraud = np.cumsum(labels[order])
        cuts = _boundaries(values)
        n_left = cuts + 1
        ok = (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
        cuts, n_left = cuts[ok], n_left[ok]
        if cuts.size == 0:
            continue
        left_fraud = cum_fraud[cuts]
        gain = parent - (
            n_left * entropy(left_fraud, n_left)
            + (n - n_left) * entropy(n_fraud - left_fraud, n - n_left)
        ) / n
        k = int(np.flatnonzero(gain >= gain.max() - _GAIN_TOL)[0])
        if best is None or gain[k] > best[0] + _GAIN_TOL:
            best = (float(gain[k]), int(f), _midpoint(values[cuts[k]], values[cuts[k] + 1]))
    return best


MaxFeatures = Literal["sqrt"] | int | None


def _n_candidates(max_features: MaxFeatures, n_features: int) -> int:
    if max_features is None:
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    return max(1, min(int(max_features), n_features))


def fit_entropy_tree(
    features: np.ndarray,
    labels: np.ndarray,
    max_depth: int | None,
    min_samples_leaf: int,
    max_features: MaxFeatures = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Grows an entropy tree on ``features``/``labels``.

    Args:
        features: (n, d) training matrix.
        labels: 0/1 labels.
        max_depth: depth cap; ``None`` grows until nodes are pure or too small.
        min_samples_leaf: fewest rows either child may hold.
        max_features: features drawn per node ("sqrt", a count, or all).
        rng: feature sampler; required when fewer than d features are drawn.

    Returns:
        The fitted Tree; leaf values are (normal, fraud) counts.

    When none of a node's drawn features has a valid cut, the next batch of
    the node's feature permutation is tried before the node becomes a leaf.
    """
    n_features = features.shape[1]
    n_sampled = _n_candidates(max_features, n_features)

    def find_split(rows: np.ndarray, depth: int) -> Split | None:
        x, y = features[rows], labels[rows]
        if n_sampled >= n_features:
            return best_entropy_split(x, y, np.arange(n_features), min_samples_leaf)
        assert rng is not None
        order = rng.permutation(n_features)
        for start in range(0, n_features, n_sampled):
            candidates = np.sort(order[start : start + n_sampled])
            split = best_entropy_split(x, y, candidates, min_samples_leaf)
            if split is not None:
                return split
            if y.sum() in (0, y.size) or y.size < 2 * min_samples_leaf:
                break
        return None

    def leaf_value(rows: np.ndarray) -> np.ndarray:
        n_fraud = float(labels[rows].sum())
        return np.array([rows.size - n_fraud, n_fraud])

    return grow_tree(labels.size, find_split, leaf_value, features, max_depth)


def fraud_fraction(tree: Tree, rows: np.ndarray) -> np.ndarray:
    counts = tree.value[tree.apply(rows)]
    return counts[:, 1] / counts.sum(axis=1)


class DecisionTree:
    """Binary classification tree grown on information gain (entropy)."""

    kind: ClassVar[str] = "dt"

    def __init__(self, max_depth: int | None = 3, min_samples_leaf: int = 6) -> None:
        if max_depth is not None and max_depth < 1:
            raise ValueError(f"max_depth must be at least 1, got {max_depth}")
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.criterion = "entropy"
        self.tree: Tree | None = None
        self.n_features = 0

    def fit(self, data: Dataset) -> "DecisionTree":
        self.n_features = data.n_cols
        self.tree = fit_entropy_tree(
            data.features, data.labels, self.max_depth, self.min_samples_leaf
        )
        return self

    def score(self, rows: np.ndarray) -> np.ndarray:
        assert self.tree is not None, "fit() first"
        return fraud_fraction(self.tree, as_rows(rows, self.n_features))

    def predict(self, rows: np.ndarray) -> np.ndarray:
        return (self.score(rows) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        assert self.tree is not None, "fit() first"
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "n_features": self.n_features,
            "tree": self.tree.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DecisionTree":
        model = cls(payload["max_depth"], payload["min_samples_leaf"])
        model.n_features = int(payload["n_features"])
        model.tree = Tree.from_dict(payload["tree"])
        return model


class RandomForest:
    """Bagged entropy trees with per-split feature subsampling.

    ``score`` averages the trees' leaf fraud fractions; ``predict`` is the
    majority vote (mean hard vote above one half).
    """

    kind: ClassVar[str] = "rf"

    def __init__(
        self,
        n_estimators: int = 30,
        oob_score: bool = True,
        max_depth: int | None = None,
        min_samples_leaf: int = 1,
        max_features: MaxFeatures = "sqrt",
        bootstrap: bool = True,
        seed: int = 0,
    ) -> None:
        if n_estimators < 1:
            raise ValueError(f"n_estimators must be at least 1, got {n_estimators}")
        self.n_estimators = n_estimators
        self.compute_oob = oob_score
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.tree_seeds: list[int] = []
        self.trees: list[Tree] = []
        self.oob_score: float | None = None
        self.n_features = 0

    def fit(self, data: Dataset) -> "RandomForest":
        # lexicographic row order: the forest depends on the row multiset only
        canonical = np.lexsort(np.column_stack([data.features, data.labels])[:, ::-1].T)
        x, y = data.features[canonical], data.labels[canonical]
        n = data.n_rows
        self.n_features = data.n_cols
        self.tree_seeds = spawn_seeds(self.seed, self.n_estimators)
        self.trees = []
        oob_votes = np.zeros(n)
        oob_counts = np.zeros(n)
        for tree_seed in self.tree_seeds:
            rng = np.random.default_rng(tree_seed)
            sample = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = fit_entropy_tree(
                x[sample], y[sample], self.max_depth, self.min_samples_leaf, self.max_features, rng
            )
            self.trees.append(tree)
            if self.compute_oob and self.bootstrap:
                out_of_bag = np.ones(n, dtype=bool)
                out_of_bag[sample] = False
                if np.any(out_of_bag):
                    votes = fraud_fraction(tree, x[out_of_bag]) > 0.5
                    oob_votes[out_of_bag] += votes
                    oob_counts[out_of_bag] += 1
        if self.compute_oob:
            seen = oob_counts > 0
            if np.any(seen):
                majority = (oob_votes[seen] / oob_counts[seen] > 0.5).astype(np.int64)
                self.oob_score = float(np.mean(majority == y[seen]))
            else:
                logger.warning("No out-of-bag rows; oob_score left unset")
        return self

    def tree_votes(self, rows: np.ndarray) -> np.ndarray:
        """(n_trees, n_rows) hard votes."""
        rows = as_rows(rows, self.n_features)
        return np.vstack([fraud_fraction(t, rows) > 0.5 for t in self.trees]).astype(np.int64)

    def score(self, rows: np.ndarray) -> np.ndarray:
        rows = as_rows(rows, self.n_features)
        return np.mean([fraud_fraction(t, rows) for t in self.trees], axis=0)

    def predict(self, rows: np.ndarray) -> np.ndarray:
        return (self.tree_votes(rows).mean(axis=0) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "oob_score_enabled": self.compute_oob,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "tree_seeds": self.tree_seeds,
            "oob_score": self.oob_score,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RandomForest":
        model = cls(
            payload["n_estimators"],
            payload["oob_score_enabled"],
            payload["max_depth"],
            payload["min_samples_leaf"],
            payload["max_features"],
            payload["bootstrap"],
            payload["seed"],
        )
        model.tree_seeds = list(payload["tree_seeds"])
        model.oob_score = payload["oob_score"]
        model.n_features = int(payload["n_features"])
        model.trees = [Tree.from_dict(t) for t in payload["trees"]]
        return model


def best_newton_split(
    features: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    reg_lambda: float,
    gamma: float,
    min_child_weight: float,
) -> Split | None:
    """Exact greedy split maximising the second-order loss reduction."""
    g_total, h_total = grad.sum(), hess.sum()
    parent = g_total * g_total / (h_total + reg_lambda)
    best: Split | None = None
    for f in range(features.shape[1]):
        order = np.argsort(features[:, f], kind="stable")
        values = features[order, f]
        g_left = np.cumsum(grad[order])
        h_left = np.cumsum(hess[order])
        cuts = _boundaries(values)
        gl, hl = g_left[cuts], h_left[cuts]
        gr, hr = g_total - gl, h_total - hl
        ok = (hl >= min_child_weight) & (hr >= min_child_weight)
        if not np.any(ok):
            continue
        cuts, gl, hl, gr, hr = cuts[ok], gl[ok], hl[ok], gr[ok], hr[ok]
        gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent) - gamma
        k = int(np.flatnonzero(gain >= gain.max() - _GAIN_TOL)[0])
        if best is None or gain[k] > best[0] + _GAIN_TOL:
            best = (float(gain[k]), f, _midpoint(values[cuts[k]], values[cuts[k] + 1]))
    if best is None or best[0] <= _GAIN_TOL * max(1.0, parent):
        return None
    return best


def log_loss(labels: np.ndarray, margin: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, margin) - labels * margin))


class GradientBoosting:
    """Boosted regression trees on the log loss (second-order, exact greedy).

    Leaf weights are -G / (H + lambda); the score is sigmoid of
    base margin + learning_rate * sum of tree outputs.
    """

    kind: ClassVar[str] = "xgb"

    def __init__(
        self,
        learning_rate: float = 0.4,
        max_depth: int = 4,
        n_rounds: int = 100,
        reg_lambda: float = 1.0,
        gamma: float = 0.0,
        min_child_weight: float = 1.0,
        base_score: float = 0.5,
    ) -> None:
        if n_rounds < 0:
            raise ValueError(f"n_rounds must be non-negative, got {n_rounds}")
        if not 0.0 < base_score < 1.0:
            raise ValueError(f"base_score must lie in (0, 1), got {base_score}")
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.n_rounds = n_rounds
        self.reg_lambda = reg_lambda
        self.gamma = gamma
        self.min_child_weight = min_child_weight
        self.base_score = base_score
        self.trees: list[Tree] = []
        self.train_loss_history: list[float] = []
        self.n_features = 0

    @property
    def base_margin(self) -> float:
        return float(np.log(self.base_score / (1.0 - self.base_score)))

    def _tree_output(self, tree: Tree, rows: np.ndarray) -> np.ndarray:
        return tree.value[tree.apply(rows), 0]

    def fit(self, data: Dataset) -> "GradientBoosting":
        x, y = data.features, data.labels.astype(np.float64)
        self.n_features = data.n_cols
        margin = np.full(data.n_rows, self.base_margin)
        self.trees = []
        self.train_loss_history = [log_loss(y, margin)]
        for round_ in range(self.n_rounds):
            p = expit(margin)
            grad = p - y
            hess = np.maximum(p * (1.0 - p), 1e-16)

            def find_split(rows: np.ndarray, depth: int, g: np.ndarray = grad, h: np.ndarray = hess) -> Split | None:
                return best_newton_split(
                    x[rows], g[rows], h[rows], self.reg_lambda, self.gamma, self.min_child_weight
                )

            def leaf_value(rows: np.ndarray, g: np.ndarray = grad, h: np.ndarray = hess) -> np.ndarray:
                return np.array([-g[rows].sum() / (h[rows].sum() + self.reg_lambda)])

            tree = grow_tree(data.n_rows, find_split, leaf_value, x, self.max_depth)
            self.trees.append(tree)
            margin = margin + self.learning_rate * self._tree_output(tree, x)
            self.train_loss_history.append(log_loss(y, margin))
            logger.debug(f"boosting round {round_}: train log loss {self.train_loss_history[-1]:.6f}")
        return self

    def margin(self, rows: np.ndarray) -> np.ndarray:
        rows = as_rows(rows, self.n_features)
        out = np.full(rows.shape[0], self.base_margin)
        for tree in self.trees:
            out += self.learning_rate * self._tree_output(tree, rows)
        return out

    def score(self, rows: np.ndarray) -> np.ndarray:
        return expit(self.margin(rows))

    def predict(self, rows: np.ndarray) -> np.ndarray:
        return (self.score(rows) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "n_rounds": self.n_rounds,
            "reg_lambda": self.reg_lambda,
            "gamma": self.gamma,
            "min_child_weight": self.min_child_weight,
            "base_score": self.base_score,
            "n_features": self.n_features,
            "train_loss_history": self.train_loss_history,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GradientBoosting":
        model = cls(
            payload["learning_rate"],
            payload["max_depth"],
            payload["n_rounds"],
            payload["reg_lambda"],
            payload["gamma"],
            payload["min_child_weight"],
            payload["base_score"],
        )
        model.n_features = int(payload["n_features"])
        model.train_loss_history = list(payload["train_loss_history"])
        model.trees = [Tree.from_dict(t) for t in payload["trees"]]
        return model
