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

"""Transaction data: ingestion, robust scaling, downsampling and fold plans."""

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from fraudbench.errors import DataError, DatasetNotFoundError

logger = logging.getLogger(__name__)

PCA_COLUMNS: tuple[str, ...] = tuple(f"V{i}" for i in range(1, 29))
FEATURE_COLUMNS: tuple[str, ...] = ("Time", *PCA_COLUMNS, "Amount")
LABEL_COLUMN = "Class"
CREDITCARD_SCHEMA: tuple[str, ...] = (*FEATURE_COLUMNS, LABEL_COLUMN)
DEFAULT_SCALE_COLUMNS: tuple[str, ...] = ("Time", "Amount")


def _frozen(array: np.ndarray, dtype: type) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, binary labels (1 = fraud) and column names.

    Arrays are copied and made read-only on construction.
    """

    features: np.ndarray
    labels: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self) -> None:
        features = _frozen(self.features, np.float64)
        raw_labels = np.asarray(self.labels)
        if features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {features.shape}")
        if raw_labels.shape != (features.shape[0],):
            raise DataError(
                f"labels shape {raw_labels.shape} does not match {features.shape[0]} rows"
            )
        if len(self.column_names) != features.shape[1]:
            raise DataError(
                f"{len(self.column_names)} column names for {features.shape[1]} columns"
            )
        if not np.all(np.isfinite(features)):
            row, col = np.argwhere(~np.isfinite(features))[0]
            raise DataError(
                "non-finite feature value", row=int(row) + 1, column=self.column_names[col]
            )
        valid = (raw_labels == 0) | (raw_labels == 1)
        if not np.all(valid):
            row = int(np.flatnonzero(~valid)[0])
            raise DataError("label outside {0,1}", row=row + 1, column=LABEL_COLUMN)
        labels = _frozen(raw_labels, np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n_rows(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.features.shape[1])

    def class_counts(self) -> tuple[int, int]:
        """(normal, fraud) row counts."""
        n_fraud = int(self.labels.sum())
        return self.n_rows - n_fraud, n_fraud

    def take(self, indices: np.ndarray | Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.column_names)

    def select(self, columns: Sequence[str]) -> "Dataset":
        missing = [c for c in columns if c not in self.column_names]
        if missing:
            raise DataError(f"unknown columns {missing}")
        idx = [self.column_names.index(c) for c in columns]
        return Dataset(self.features[:, idx], self.labels, tuple(columns))

    def normals(self) -> "Dataset":
        return self.take(np.flatnonzero(self.labels == 0))


@dataclass(frozen=True)
class ScalerParams:
    """Per-column median and inter-quartile range of the scaled columns."""

    columns: tuple[str, ...]
    median: np.ndarray
    iqr: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "median", _frozen(self.median, np.float64))
        object.__setattr__(self, "iqr", _frozen(self.iqr, np.float64))
        object.__setattr__(self, "columns", tuple(self.columns))
        if self.median.shape != (len(self.columns),) or self.iqr.shape != self.median.shape:
            raise DataError("scaler params must have one entry per scaled column")
        if np.any(self.iqr < 0):
            raise DataError("iqr must be non-negative")

    def to_dict(self) -> dict:
        return {
            "columns": list(self.columns),
            "median": self.median.tolist(),
            "iqr": self.iqr.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ScalerParams":
        return cls(tuple(payload["columns"]), np.asarray(payload["median"]), np.asarray(payload["iqr"]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScalerParams):
            return NotImplemented
        return (
            self.columns == other.columns
            and np.array_equal(self.median, other.median)
            and np.array_equal(self.iqr, other.iqr)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class FoldPlan:
    """Stratified assignment of every row to one of ``k`` folds."""

    k: int
    fold_assignment: np.ndarray
    seed: int
    _folds: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        assignment = _frozen(self.fold_assignment, np.int64)
        if self.k < 2:
            raise DataError(f"k must be at least 2, got {self.k}")
        if assignment.size and (assignment.min() < 0 or assignment.max() >= self.k):
            raise DataError("fold assignment outside [0, k)")
        object.__setattr__(self, "fold_assignment", assignment)
        folds = tuple(np.flatnonzero(assignment == f) for f in range(self.k))
        object.__setattr__(self, "_folds", folds)

    @property
    def n_rows(self) -> int:
        return int(self.fold_assignment.size)

    def test_indices(self, fold: int) -> np.ndarray:
        return self._folds[fold]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignment != fold)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FoldPlan):
            return NotImplemented
        return (
            self.k == other.k
            and self.seed == other.seed
            and np.array_equal(self.fold_assignment, other.fold_assignment)
        )

    __hash__ = None  # type: ignore[assignment]


def load_csv(
    path: str | Path, schema: Sequence[str] | None = CREDITCARD_SCHEMA
) -> Dataset:
    """Reads a creditcard.csv-style file into a Dataset.

    The last schema column is the label; all other columns are features.
    With ``schema=None`` any header ending in the label column is accepted.
    Rows are numbered from 1 (first data row after the header).

    Args:
        path: CSV file to read.
        schema: exact expected header, or None for any ``...,Class`` header.

    Returns:
        The parsed Dataset.

    Raises:
        DatasetNotFoundError: ``path`` is not a file.
        DataError: bad header, non-numeric cell (with row and column) or a
            label other than 0/1.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetNotFoundError(str(path))

    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    header = list(frame.columns)
    if schema is None:
        if len(header) < 2 or header[-1] != LABEL_COLUMN:
            raise DataError(f"header {header} must end with {LABEL_COLUMN!r}")
    elif header != list(schema):
        raise DataError(f"header {header} does not match expected schema {list(schema)}")

    values = np.empty(frame.shape, dtype=np.float64)
    for j, column in enumerate(header):
        parsed = pd.to_numeric(frame[column].str.strip(), errors="coerce")
        bad = np.flatnonzero(parsed.isna().to_numpy())
        if bad.size:
            raise DataError(
                f"non-numeric cell {frame[column].iloc[bad[0]]!r}",
                row=int(bad[0]) + 1,
                column=column,
            )
        values[:, j] = _parse_exact(frame[column])

    labels = values[:, -1]
    bad_labels = np.flatnonzero((labels != 0) & (labels != 1))
    if bad_labels.size:
        raise DataError(
            f"label {labels[bad_labels[0]]!r} outside {{0,1}}",
            row=int(bad_labels[0]) + 1,
            column=header[-1],
        )
    logger.info(f"Loaded {len(frame)} rows from {path}")
    return Dataset(values[:, :-1], labels.astype(np.int64), tuple(header[:-1]))


def _parse_exact(column: pd.Series) -> np.ndarray:
    # float() is correctly rounded, so values are bit-equal to the text.
    return np.fromiter((float(v) for v in column), dtype=np.float64, count=len(column))


def write_csv(data: Dataset, path: str | Path) -> Path:
    """Writes a Dataset back out in the creditcard.csv layout."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(data.features, columns=list(data.column_names))
    frame[LABEL_COLUMN] = data.labels
    frame.to_csv(path, index=False, quoting=csv.QUOTE_NONNUMERIC)
    return path


def _quartiles(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75], axis=0, method="linear")
    return median, q3 - q1


def apply_scaler(data: Dataset, params: ScalerParams) -> Dataset:
    """(x - median) / iqr on the fitted columns; zero where iqr is zero."""
    features = data.features.copy()
    for column, median, iqr in zip(params.columns, params.median, params.iqr, strict=True):
        if column not in data.column_names:
            raise DataError(f"scaled column {column!r} missing from data")
        j = data.column_names.index(column)
        features[:, j] = 0.0 if iqr == 0 else (features[:, j] - median) / iqr
    return Dataset(features, data.labels, data.column_names)


def robust_scale(
    data: Dataset, columns: Sequence[str] | None = None
) -> tuple[Dataset, ScalerParams]:
    """Fits median/IQR scaling on ``columns`` and applies it.

    ``columns`` defaults to Time and Amount (whichever are present); V1..V28
    are already PCA outputs.
    """
    if columns is None:
        columns = [c for c in DEFAULT_SCALE_COLUMNS if c in data.column_names]
    missing = [c for c in columns if c not in data.column_names]
    if missing:
        raise DataError(f"cannot scale unknown columns {missing}")
    idx = [data.column_names.index(c) for c in columns]
    if idx and data.n_rows:
        median, iqr = _quartiles(data.features[:, idx])
    else:
        median, iqr = np.zeros(len(idx)), np.zeros(len(idx))
    params = ScalerParams(tuple(columns), median, iqr)
    return apply_scaler(data, params), params


def downsample_balanced(data: Dataset, seed: int) -> Dataset:
    """Keeps every minority row and an equal-sized random draw of the majority."""
    n_normal, n_fraud = data.class_counts()
    if n_normal == 0 or n_fraud == 0:
        raise DataError(
            f"downsampling needs both classes, got {n_normal} normal / {n_fraud} fraud"
        )
    rng = np.random.default_rng(seed)
    minority_label = 1 if n_fraud <= n_normal else 0
    minority = np.flatnonzero(data.labels == minority_label)
    majority = np.flatnonzero(data.labels != minority_label)
    kept = rng.choice(majority, size=minority.size, replace=False)
    order = rng.permutation(np.concatenate([minority, np.sort(kept)]))
    return data.take(order)


def stratified_kfold(data: Dataset, k: int, seed: int) -> FoldPlan:
    """Shuffles each class and deals its rows round-robin over the folds.

    Each class continues the deal where the previous one stopped, so fold
    sizes differ by at most one as well.
    """
    if k < 2:
        raise DataError(f"k must be at least 2, got {k}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(data.n_rows, dtype=np.int64)
    offset = 0
    for label in (0, 1):
        rows = np.flatnonzero(data.labels == label)
        if rows.size < k:
            raise DataError(f"class {label} has {rows.size} rows, fewer than k={k}")
        rows = rng.permutation(rows)
        assignment[rows] = (offset + np.arange(rows.size)) % k
        offset = (offset + rows.size) % k
    return FoldPlan(k, assignment, seed)


def synth_generate(
    n_normal: int, n_fraud: int, separation: float, dims: int, seed: int
) -> Dataset:
    """Gaussian stand-in for the transaction table.

    Normal rows are N(0, I). Fraud rows are N(separation * 1, 2I); with
    separation 0 they share the normal distribution.
    """
    if dims < 1:
        raise DataError(f"dims must be at least 1, got {dims}")
    if separation < 0:
        raise DataError(f"separation must be non-negative, got {separation}")
    rng = np.random.default_rng(seed)
    normal = rng.standard_normal((n_normal, dims))
    spread = np.sqrt(2.0) if separation > 0 else 1.0
    fraud = separation + spread * rng.standard_normal((n_fraud, dims))
    labels = np.concatenate([np.zeros(n_normal, np.int64), np.ones(n_fraud, np.int64)])
    order = rng.permutation(n_normal + n_fraud)
    names = FEATURE_COLUMNS if dims == len(FEATURE_COLUMNS) else tuple(
        f"V{i}" for i in range(1, dims + 1)
    )
    return Dataset(np.vstack([normal, fraud])[order], labels[order], names)
