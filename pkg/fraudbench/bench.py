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

"""Runs the full benchmark described by a BenchmarkConfig and writes its outputs."""

import logging
import time
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from opentelemetry import trace

from fraudbench.config import BenchmarkConfig, ModelEntry, save_config
from fraudbench.data import (
    CREDITCARD_SCHEMA,
    Dataset,
    FoldPlan,
    load_csv,
    stratified_kfold,
    synth_generate,
)
from fraudbench.eval import EvalSettings, cross_validate, grid_search
from fraudbench.plots import emit_plots
from fraudbench.registry import get_spec, model_seed
from fraudbench.utils.typing import BenchmarkReport, CvResult, DatasetSummary

logger = logging.getLogger(__name__)
tracer = trace.get_tracer(__name__)

REPORT_FILE = "report.json"
RESULTS_FILE = "results.csv"
CONFIG_FILE = "config.yaml"


def load_data(config: BenchmarkConfig) -> tuple[Dataset, str]:
    """The configured dataset and a short description of where it came from."""
    if config.dataset is not None:
        schema = CREDITCARD_SCHEMA if config.strict_schema else None
        return load_csv(config.dataset, schema), config.dataset
    assert config.synthetic is not None
    spec = config.synthetic
    data = synth_generate(spec.n_normal, spec.n_fraud, spec.separation, spec.dims, config.seed)
    return data, f"synthetic(separation={spec.separation}, dims={spec.dims})"


def eval_settings(config: BenchmarkConfig) -> EvalSettings:
    return EvalSettings(
        scale_columns=tuple(config.scale_columns),
        feature_columns={"gan": tuple(config.gan_columns)},
        ocsvm_max_train=config.ocsvm_max_train,
        nn_max_train=config.nn_max_train,
    )


def model_params(config: BenchmarkConfig, name: str, params: dict[str, Any]) -> dict[str, Any]:
    out = dict(params)
    if name == "gan":
        out.setdefault("alpha", config.alpha)
    return out


def evaluate_model(
    config: BenchmarkConfig,
    entry: ModelEntry,
    data: Dataset,
    plan: FoldPlan,
    settings: EvalSettings,
) -> CvResult:
    """Cross-validates one configured model; failures are recorded, not raised.

    Args:
        config: the run's config, for the master seed, GAN alpha and n_jobs.
        entry: the model with its fixed params. A non-empty
            ``entry.search_grid()`` triggers a grid search and the best point
            is reported.
        data: the full dataset.
        plan: the shared fold assignment.
        settings: scaling and subsampling settings.

    Returns:
        The model's CvResult, with ``error`` set instead of scores when any
        fold failed.
    """
    name = entry.name
    spec = get_spec(name)
    seed = model_seed(config.seed, name)
    params = model_params(config, name, entry.params)
    grid = entry.search_grid()
    with tracer.start_as_current_span("fraudbench.model") as span:
        span.set_attribute("model", name)
        span.set_attribute("track", spec.track)
        started = time.perf_counter()
        try:
            if grid:
                # fixed params become single-valued axes
                full_grid = {**{k: [v] for k, v in params.items()}, **grid}
                _, result, _ = grid_search(spec, full_grid, data, plan, seed, settings, config.n_jobs)
            else:
                result = cross_validate(spec, data, plan, params, seed, settings, config.n_jobs)
        except Exception as exc:
            logger.exception(f"Model {name} failed")
            result = CvResult(
                model=name,
                track=spec.track,
                params={**spec.defaults, **params},
                seed=seed,
                error=f"{type(exc).__name__}: {exc}",
            )
        seconds = time.perf_counter() - started if config.record_timings else 0.0
        if result.pooled_auroc is not None:
            span.set_attribute("auroc", result.pooled_auroc)
    logger.info(
        f"{name}: pooled AUROC {result.pooled_auroc}"
        + (f" ({seconds:.1f}s)" if config.record_timings else "")
    )
    return result.model_copy(update={"seconds": seconds})


def run_benchmark(config: BenchmarkConfig, out_dir: str | Path | None = None) -> BenchmarkReport:
    """Cross-validates every configured model and writes the run's outputs.

    The dataset is loaded before anything is written, so a missing file leaves
    no partial outputs behind.
    """
    data, source = load_data(config)
    n_normal, n_fraud = data.class_counts()
    logger.info(f"Benchmarking {len(config.models)} models on {data.n_rows} rows ({n_fraud} fraud)")
    plan = stratified_kfold(data, config.k, config.seed)
    settings = eval_settings(config)

    results = [evaluate_model(config, entry, data, plan, settings) for entry in config.models]
    means = track_means(results)
    report = BenchmarkReport(
        config=config.model_dump(mode="json"),
        dataset_summary=DatasetSummary(
            n_rows=data.n_rows, n_fraud=n_fraud, n_normal=n_normal, source=source
        ),
        results=results,
        track_means=means,
        supervised_beats_unsupervised=supervised_beats_unsupervised(means),
    )
    return write_outputs(report, config, Path(out_dir or config.output_dir))


def results_frame(report: BenchmarkReport) -> pd.DataFrame:
    """One row per (model, fold); failed models get a single row with the error."""
    rows = []
    for result in report.results:
        common = {
            "model": result.model,
            "track": result.track,
            "pooled_auroc": result.pooled_auroc,
            "mean": result.mean,
            "std": result.std,
            "seconds": result.seconds,
            "error": result.error,
        }
        if not result.per_fold_auroc:
            rows.append({**common, "fold": None, "auroc": None})
        for fold, value in enumerate(result.per_fold_auroc):
            rows.append({**common, "fold": fold, "auroc": value})
    columns = ["model", "track", "fold", "auroc", "pooled_auroc", "mean", "std", "seconds", "error"]
    return pd.DataFrame(rows, columns=columns)


def write_outputs(report: BenchmarkReport, config: BenchmarkConfig, out_dir: Path) -> BenchmarkReport:
    out_dir.mkdir(parents=True, exist_ok=True)
    results_frame(report).to_csv(out_dir / RESULTS_FILE, index=False)
    save_config(config, out_dir / CONFIG_FILE)
    plots = emit_plots(report, out_dir)
    artifacts = {
        "results": RESULTS_FILE,
        "config": CONFIG_FILE,
        **{name: path.name for name, path in sorted(plots.items())},
    }
    report = report.model_copy(update={"artifacts": artifacts})
    (out_dir / REPORT_FILE).write_text(report.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Wrote report to {out_dir / REPORT_FILE}")
    return report


def load_report(path: str | Path) -> BenchmarkReport:
    return BenchmarkReport.model_validate_json(Path(path).read_text(encoding="utf-8"))


def track_means(results: list[CvResult]) -> dict[str, float]:
    """Mean pooled AUROC per track, over the models that produced one."""
    means: dict[str, float] = {}
    for track in ("supervised", "unsupervised"):
        values = [r.pooled_auroc for r in results if r.track == track and r.pooled_auroc is not None]
        if values:
            means[track] = float(np.mean(values))
    return means


def supervised_beats_unsupervised(means: dict[str, float]) -> bool | None:
    """Whether the supervised mean AUROC is at least the unsupervised one.

    ``None`` when either track has no scored model.
    """
    if "supervised" not in means or "unsupervised" not in means:
        return None
    return means["supervised"] >= means["unsupervised"]
