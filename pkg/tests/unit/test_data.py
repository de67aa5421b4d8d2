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

from pathlib import Path

import numpy as np
import pytest

from fraudbench.data import (
    CREDITCARD_SCHEMA,
    FEATURE_COLUMNS,
    Dataset,
    ScalerParams,
    apply_scaler,
    downsample_balanced,
    load_csv,
    robust_scale,
    stratified_kfold,
    synth_generate,
    write_csv,
)
from fraudbench.errors import DataError, DatasetNotFoundError
from tests.conftest import make_dataset


def _write_rows(path: Path, rows: list[list[str]]) -> Path:
    lines = [",".join(f'"{c}"' for c in CREDITCARD_SCHEMA)]
    lines += [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _row(label: str = "0", first: str = "0.0", v3: str = "0.0") -> list[str]:
    values = [first, "0.1", "-1.5e-3", v3] + ["0.0"] * 26 + [label]
    return values


def test_load_csv_keeps_exact_values(tmp_path: Path) -> None:
    """Cells are parsed to the correctly rounded double of their text."""
    path = _write_rows(tmp_path / "cc.csv", [_row("0", "0.1"), _row("1", "172792.0")])
    data = load_csv(path)
    assert data.n_rows == 2
    assert data.column_names == FEATURE_COLUMNS
    assert data.features[0, 0] == float("0.1")
    assert data.features[1, 0] == 172792.0
    assert data.features[0, 2] == float("-1.5e-3")
    assert data.labels.tolist() == [0, 1]


def test_load_csv_names_the_row_of_a_bad_label(tmp_path: Path) -> None:
    rows = [_row() for _ in range(6)] + [_row("2")]
    path = _write_rows(tmp_path / "cc.csv", rows)
    with pytest.raises(DataError, match="row 7"):
        load_csv(path)


def test_load_csv_rejects_non_numeric_cell(tmp_path: Path) -> None:
    path = _write_rows(tmp_path / "cc.csv", [_row(), _row(v3="abc")])
    with pytest.raises(DataError, match=r"row 2, column 'V3'"):
        load_csv(path)


def test_load_csv_rejects_wrong_header(tmp_path: Path) -> None:
    path = tmp_path / "cc.csv"
    path.write_text("a,b,Class\n1,2,0\n", encoding="utf-8")
    with pytest.raises(DataError, match="header"):
        load_csv(path)
    assert load_csv(path, schema=None).column_names == ("a", "b")


def test_load_csv_missing_file(tmp_path: Path) -> None:
    missing = tmp_path / "nope.csv"
    with pytest.raises(DatasetNotFoundError, match="nope.csv"):
        load_csv(missing)


def test_write_csv_round_trips(tmp_path: Path) -> None:
    data = synth_generate(20, 5, 2.0, 30, seed=3)
    back = load_csv(write_csv(data, tmp_path / "synth.csv"))
    np.testing.assert_array_equal(back.features, data.features)
    np.testing.assert_array_equal(back.labels, data.labels)


def test_dataset_rejects_fractional_labels() -> None:
    with pytest.raises(DataError, match="row 2"):
        Dataset(np.zeros((3, 1)), np.array([0.0, 0.5, 1.0]), ("V1",))


def test_dataset_arrays_are_read_only() -> None:
    data = make_dataset([[1.0], [2.0]], [0, 1])
    with pytest.raises(ValueError):
        data.features[0, 0] = 5.0


def test_robust_scale_uses_median_and_iqr() -> None:
    amount = [1.0, 2.0, 3.0, 4.0, 100.0]
    data = make_dataset(
        np.column_stack([np.full(5, 7.0), amount, amount]),
        [0, 0, 0, 0, 1],
        ("Time", "Amount", "V1"),
    )
    scaled, params = robust_scale(data)
    assert params.columns == ("Time", "Amount")
    assert scaled.features[0, 1] == -1.0
    assert scaled.features[:, 1].tolist() == [-1.0, -0.5, 0.0, 0.5, 48.5]
    # constant column has zero IQR
    assert scaled.features[:, 0].tolist() == [0.0] * 5
    # V1 is left alone
    assert scaled.features[:, 2].tolist() == amount


def test_robust_scale_is_idempotent() -> None:
    rng = np.random.default_rng(1)
    data = make_dataset(
        np.column_stack([rng.exponential(50.0, 101), rng.uniform(0, 1e5, 101)]),
        np.zeros(101, np.int64),
        ("Amount", "Time"),
    )
    once, _ = robust_scale(data)
    twice, _ = robust_scale(once)
    np.testing.assert_allclose(twice.features, once.features, rtol=0, atol=1e-12)


def test_apply_scaler_reuses_fitted_params() -> None:
    train = make_dataset([[0.0], [2.0], [4.0], [6.0], [8.0]], [0, 0, 0, 1, 1], ("Amount",))
    _, params = robust_scale(train)
    test = make_dataset([[4.0], [12.0]], [0, 1], ("Amount",))
    assert apply_scaler(test, params).features[:, 0].tolist() == [0.0, 2.0]
    assert ScalerParams.from_dict(params.to_dict()) == params


def test_downsample_balanced_keeps_every_fraud() -> None:
    ids = np.arange(100, dtype=np.float64)
    labels = (ids >= 90).astype(np.int64)
    data = make_dataset(ids, labels)
    balanced = downsample_balanced(data, seed=5)
    assert balanced.class_counts() == (10, 10)
    kept = balanced.features[:, 0]
    assert set(range(90, 100)) <= set(kept.astype(int))
    assert len(set(kept)) == 20
    # every kept row matches its original label
    np.testing.assert_array_equal(balanced.labels, (kept >= 90).astype(np.int64))


def test_downsample_balanced_is_deterministic() -> None:
    data = make_dataset(np.arange(50.0), (np.arange(50) % 10 == 0).astype(int))
    a = downsample_balanced(data, seed=11)
    b = downsample_balanced(data, seed=11)
    np.testing.assert_array_equal(a.features, b.features)


def test_downsample_needs_both_classes() -> None:
    with pytest.raises(DataError):
        downsample_balanced(make_dataset(np.arange(4.0), [0, 0, 0, 0]), seed=0)


def test_stratified_kfold_one_row_of_each_class_per_fold() -> None:
    data = make_dataset(np.arange(10.0), [0] * 5 + [1] * 5)
    plan = stratified_kfold(data, k=5, seed=0)
    for fold in range(5):
        test = plan.test_indices(fold)
        assert sorted(data.labels[test].tolist()) == [0, 1]


def test_stratified_kfold_partitions_every_row() -> None:
    data = make_dataset(np.arange(103.0), (np.arange(103) < 17).astype(int))
    plan = stratified_kfold(data, k=5, seed=2)
    tests = np.concatenate([plan.test_indices(f) for f in range(5)])
    assert sorted(tests.tolist()) == list(range(103))
    for fold in range(5):
        assert set(plan.train_indices(fold)).isdisjoint(plan.test_indices(fold))
        assert plan.train_indices(fold).size + plan.test_indices(fold).size == 103


def test_stratified_kfold_creditcard_fold_sizes() -> None:
    n_rows, n_fraud = 284_807, 492
    labels = np.zeros(n_rows, np.int64)
    labels[:n_fraud] = 1
    data = Dataset(np.zeros((n_rows, 1)), labels, ("V1",))
    plan = stratified_kfold(data, k=5, seed=0)
    sizes = [plan.test_indices(f).size for f in range(5)]
    assert set(sizes) <= {56_961, 56_962}
    frauds = [int(labels[plan.test_indices(f)].sum()) for f in range(5)]
    assert set(frauds) <= {98, 99}
    assert sum(frauds) == n_fraud


def test_stratified_kfold_rejects_too_many_folds() -> None:
    data = make_dataset(np.arange(10.0), [0] * 7 + [1] * 3)
    with pytest.raises(DataError, match="fewer than k"):
        stratified_kfold(data, k=5, seed=0)


def test_synth_generate_without_fraud() -> None:
    data = synth_generate(50, 0, 3.0, 8, seed=0)
    assert data.class_counts() == (50, 0)
    assert data.column_names == tuple(f"V{i}" for i in range(1, 9))


def test_synth_generate_uses_creditcard_names_for_30_dims() -> None:
    data = synth_generate(10, 5, 1.0, 30, seed=0)
    assert data.column_names == FEATURE_COLUMNS


def test_synth_generate_shifts_fraud_mean() -> None:
    data = synth_generate(2000, 2000, 4.0, 3, seed=9)
    fraud_mean = data.features[data.labels == 1].mean()
    normal_mean = data.features[data.labels == 0].mean()
    assert abs(normal_mean) < 0.1
    assert abs(fraud_mean - 4.0) < 0.15
