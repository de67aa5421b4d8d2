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

"""Checksummed JSON files for fitted models and pipelines.

Line one holds the SHA-256 of the body; the body is
``{"format": "fraudbench-model", "version": 1, "kind": ..., "payload": ...}``.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from fraudbench.data import Dataset, ScalerParams, apply_scaler
from fraudbench.errors import CorruptModelError
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

logger = logging.getLogger(__name__)

FORMAT = "fraudbench-model"
VERSION = 1
PIPELINE_KIND = "pipeline"

MODEL_CLASSES: dict[str, Any] = {
    cls.kind: cls
    for cls in (
        LogisticRegression,
        KNearestNeighbors,
        LinearSvm,
        DecisionTree,
        RandomForest,
        GradientBoosting,
        OneClassSvm,
        GaussianBernoulliRbm,
        AutoEncoder,
        AdversarialDetector,
    )
}


@dataclass(frozen=True)
class FittedPipeline:
    """A fitted model with the scaling and column selection it was trained under."""

    scaler: ScalerParams
    columns: tuple[str, ...]
    track: Track
    model: ScoredModel

    def score(self, data: Dataset) -> np.ndarray:
        return self.model.score(apply_scaler(data.select(self.columns), self.scaler).features)

    def to_dict(self) -> dict:
        return {
            "scaler": self.scaler.to_dict(),
            "columns": list(self.columns),
            "track": self.track,
            "model": {"kind": self.model.kind, "payload": self.model.to_dict()},
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FittedPipeline":
        return cls(
            scaler=ScalerParams.from_dict(payload["scaler"]),
            columns=tuple(payload["columns"]),
            track=payload["track"],
            model=_model_from(payload["model"]["kind"], payload["model"]["payload"]),
        )


def _model_from(kind: str, payload: dict) -> ScoredModel:
    if kind not in MODEL_CLASSES:
        raise CorruptModelError(f"unknown model kind {kind!r}")
    return MODEL_CLASSES[kind].from_dict(payload)


def _write(kind: str, payload: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = json.dumps(
        {"format": FORMAT, "version": VERSION, "kind": kind, "payload": payload},
        sort_keys=True,
    )
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    path.write_text(f"{digest}\n{body}", encoding="utf-8")
    logger.info(f"Saved {kind} to {path}")
    return path


def _read(path: str | Path) -> tuple[str, dict]:
    path = Path(path)
    if not path.is_file():
        raise CorruptModelError(f"model file not found: {path}")
    text = path.read_text(encoding="utf-8")
    digest, sep, body = text.partition("\n")
    if not sep or hashlib.sha256(body.encode("utf-8")).hexdigest() != digest.strip():
        raise CorruptModelError(f"checksum mismatch in {path}")
    try:
        document = json.loads(body)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"{path} is not valid JSON: {exc}") from exc
    if document.get("format") != FORMAT or document.get("version") != VERSION:
        raise CorruptModelError(
            f"{path} is not a {FORMAT} v{VERSION} file "
            f"(format={document.get('format')!r}, version={document.get('version')!r})"
        )
    return document["kind"], document["payload"]


def save_model(model: ScoredModel, path: str | Path) -> Path:
    """Writes a fitted model as a checksummed JSON document.

    Args:
        model: any fitted model from the registry.
        path: destination file; parent directories are created.

    Returns:
        The written path.
    """
    return _write(model.kind, model.to_dict(), path)


def load_model(path: str | Path) -> ScoredModel:
    """Reads a model written by ``save_model`` (or the model of a pipeline).

    Args:
        path: model file.

    Returns:
        The model, scoring identically to the one saved.

    Raises:
        CorruptModelError: missing file, checksum mismatch, bad JSON, wrong
            format or version, or an unknown model kind.
    """
    kind, payload = _read(path)
    if kind == PIPELINE_KIND:
        return FittedPipeline.from_dict(payload).model
    return _model_from(kind, payload)


def save_pipeline(pipeline: FittedPipeline, path: str | Path) -> Path:
    return _write(PIPELINE_KIND, pipeline.to_dict(), path)


def load_pipeline(path: str | Path) -> FittedPipeline:
    kind, payload = _read(path)
    if kind != PIPELINE_KIND:
        raise CorruptModelError(f"{path} holds a bare {kind!r} model, not a pipeline")
    return FittedPipeline.from_dict(payload)
