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

"""ROC analysis, k-fold cross-validation and grid search."""

import itertools
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from joblib import Parallel, delayed
from opentelemetry import trace

from fraudbench.data import (
    DEFAULT_SCALE_COLUMNS,
    Dataset,
    FoldPlan,
    ScalerParams,
    apply_scaler,
    downsample_balanced,
    robust_scale,
)
from fraudbench.errors import EvaluationError, FoldError
from fraudbench.numkit import spawn_seeds
from fraudbench.registry import ModelSpec
from fraudbench.utils.typing import CvResult, ScoredModel

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

NEURAL_KINDS = frozenset({"rbm", "ae", "gan"})


@dataclass(frozen=True)
class RocCurve:
    """(fpr, tpr) points for descending thresholds, starting at (0, 0)."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(f), float(t)) for f, t in zip(self.fpr, self.tpr, strict=True)]


def roc_curve(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> RocCurve:
    """One point per distinct score; tied scores move together."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise EvaluationError(
            f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors"
        )
    if not np.all(np.isfinite(scores)):
        raise EvaluationError("scores contain non-finite values")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos + n_neg != labels.size:
        raise EvaluationError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError(f"ROC needs both classes, got {n_pos} positive / {n_neg} negative")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    positives = (labels[order] == 1).astype(np.int64)
    # last index of every tie group
    ends = np.r_[np.flatnonzero(np.diff(sorted_scores)), scores.size - 1]
    tp = np.cumsum(positives)[ends]
    fp = (ends + 1) - tp
    return RocCurve(
        fpr=np.r_[0.0, fp / n_neg],
        tpr=np.r_[0.0, tp / n_pos],
        thresholds=np.r_[np.inf, sorted_scores[ends]],
    )


def auroc(curve: RocCurve) -> float:
    return float(np.trapezoid(curve.tpr, curve.fpr))


def roc_auc_score(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> float:
    return auroc(roc_curve(scores, labels))


@dataclass(frozen=True)
class EvalSettings:
    """Protocol knobs shared by every fold of a run."""

    scale_columns: tuple[str, ...] = DEFAULT_SCALE_COLUMNS
    feature_columns: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    ocsvm_max_train: int = 20_000
    nn_max_train: int = 50_000


@dataclass(frozen=True)
class FoldFit:
    """Everything fitted on a fold's training rows."""

    scaler: ScalerParams
    columns: tuple[str, ...]
    model: ScoredModel


@dataclass(frozen=True)
class FoldOutcome:
    fold: int
    test_indices: np.ndarray
    scores: np.ndarray
    fit: FoldFit


def resolve_columns(
    spec: ModelSpec, data: Dataset, settings: EvalSettings
) -> tuple[str, ...]:
    """Columns a model sees: its configured subset that is present, else all."""
    wanted = settings.feature_columns.get(spec.name, spec.feature_columns)
    if wanted is None:
        return data.column_names
    present = tuple(c for c in wanted if c in data.column_names)
    return present or data.column_names


def fit_pipeline(
    spec: ModelSpec,
    train: Dataset,
    params: Mapping[str, Any] | None = None,
    seed: int = 0,
    settings: EvalSettings | None = None,
) -> FoldFit:
    """Scales, balances or filters ``train`` for the model's track, then fits.

    Args:
        spec: the model to build.
        train: training rows only; nothing else reaches the scaler.
        params: overrides of the spec's defaults.
        seed: drives downsampling, subsampling and the model's own RNG.
        settings: scaling columns, column subsets and subsampling caps.

    Returns:
        The fitted scaler, the model's columns and the fitted model.
    """
    settings = settings or EvalSettings()
    params = dict(params or {})
    columns = resolve_columns(spec, train, settings)
    train = train.select(columns)
    scaled, scaler = robust_scale(
        train, [c for c in settings.scale_columns if c in columns]
    )
    if spec.track == "supervised":
        fit_rows = downsample_balanced(scaled, seed)
    else:
        fit_rows = scaled.normals()
        if spec.name == "ocsvm":
            params.setdefault("max_train", settings.ocsvm_max_train)
        elif spec.name in NEURAL_KINDS and fit_rows.n_rows > settings.nn_max_train:
            rng = np.random.default_rng(seed)
            keep = np.sort(rng.choice(fit_rows.n_rows, settings.nn_max_train, replace=False))
            logger.info(f"{spec.name}: subsampled {fit_rows.n_rows} normals to {keep.size}")
            fit_rows = fit_rows.take(keep)
    model = spec.build(params, seed).fit(fit_rows)
    return FoldFit(scaler, columns, model)


def score_pipeline(fit: FoldFit, data: Dataset) -> np.ndarray:
    return fit.model.score(apply_scaler(data.select(fit.columns), fit.scaler).features)


def run_fold(
    spec: ModelSpec,
    data: Dataset,
    plan: FoldPlan,
    fold: int,
    params: Mapping[str, Any] | None = None,
    seed: int = 0,
    settings: EvalSettings | None = None,
) -> FoldOutcome:
    """Fits on the fold's training rows and scores its untouched test rows.

    Only ``plan.train_indices(fold)`` reach the scaler, the downsampler and
    the model.
    """
    if plan.n_rows != data.n_rows:
        raise EvaluationError(f"fold plan covers {plan.n_rows} rows, data has {data.n_rows}")
    with tracer.start_as_current_span("fraudbench.fold") as span:
        span.set_attribute("model", spec.name)
        span.set_attribute("fold", fold)
        span.set_attribute("track", spec.track)
        try:
            fit = fit_pipeline(spec, data.take(plan.train_indices(fold)), params, seed, settings)
            test_indices = plan.test_indices(fold)
            scores = np.asarray(score_pipeline(fit, data.take(test_indices)), dtype=np.float64)
        except FoldError:
            raise
        except Exception as exc:
            raise FoldError(fold, exc) from exc
    return FoldOutcome(fold, test_indices, scores, fit)


def cross_validate(
    spec: ModelSpec,
    data: Dataset,
    plan: FoldPlan,
    params: Mapping[str, Any] | None = None,
    seed: int = 0,
    settings: EvalSettings | None = None,
    n_jobs: int = 1,
) -> CvResult:
    """Per-fold and pooled out-of-fold AUROC of one configuration.

    Args:
        spec: the model to evaluate.
        data: the full dataset; every row is scored exactly once.
        plan: fold assignment over ``data``.
        params: overrides of the spec's defaults.
        seed: parent seed; each fold gets its own spawned child seed.
        settings: scaling and subsampling settings.
        n_jobs: folds fitted in parallel through joblib.

    Returns:
        A CvResult with per-fold AUROCs in fold order, the pooled AUROC and
        the fold mean and standard deviation.

    Raises:
        FoldError: a fold failed to fit or score, or its test rows hold a
            single class.
    """
    fold_seeds = spawn_seeds(seed, plan.k)
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(run_fold)(spec, data, plan, fold, params, fold_seeds[fold], settings)
        for fold in range(plan.k)
    )
    outcomes = sorted(outcomes, key=lambda o: o.fold)

    per_fold = []
    for outcome in outcomes:
        try:
            per_fold.append(roc_auc_score(outcome.scores, data.labels[outcome.test_indices]))
        except EvaluationError as exc:
            raise FoldError(outcome.fold, exc) from exc
        logger.debug(f"{spec.name} fold {outcome.fold}: AUROC {per_fold[-1]:.4f}")

    pooled_scores = np.concatenate([o.scores for o in outcomes])
    pooled_labels = np.concatenate([data.labels[o.test_indices] for o in outcomes])
    return CvResult(
        model=spec.name,
        track=spec.track,
        params={**spec.defaults, **(params or {})},
        per_fold_auroc=per_fold,
        pooled_auroc=roc_auc_score(pooled_scores, pooled_labels),
        mean=float(np.mean(per_fold)),
        std=float(np.std(per_fold)),
        seed=seed,
    )


def grid_points(grid: Mapping[str, Sequence[Any]]) -> list[dict[str, Any]]:
    """Cartesian product over sorted keys, values in listed order."""
    keys = sorted(grid)
    return [dict(zip(keys, values, strict=True)) for values in itertools.product(*(grid[k] for k in keys))]


def grid_search(
    spec: ModelSpec,
    grid: Mapping[str, Sequence[Any]],
    data: Dataset,
    plan: FoldPlan,
    seed: int = 0,
    settings: EvalSettings | None = None,
    n_jobs: int = 1,
) -> tuple[dict[str, Any], CvResult, list[CvResult]]:
    """Best combination by mean fold AUROC; the first one wins ties.

    Returns (best params, best result, every trial in iteration order).
    """
    points = grid_points(grid)
    if not grid or not points:
        raise EvaluationError(f"empty hyperparameter grid for {spec.name}")
    trials = [cross_validate(spec, data, plan, p, seed, settings, n_jobs) for p in points]
    best = 0
    for i, trial in enumerate(trials):
        best_mean = trials[best].mean
        if trial.mean is not None and (best_mean is None or trial.mean > best_mean):
            best = i
    logger.info(f"{spec.name}: best of {len(points)} grid points is {points[best]}")
    return points[best], trials[best], trials
