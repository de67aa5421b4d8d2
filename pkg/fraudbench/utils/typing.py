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

from typing import Any, ClassVar, Literal, Protocol, runtime_checkable

import numpy as np
from pydantic import BaseModel, Field

from fraudbench.errors import NumkitError

Track = Literal["supervised", "unsupervised"]


@runtime_checkable
class ScoredModel(Protocol):
    """Anything fitted that ranks rows by how fraud-like they are."""

    kind: ClassVar[str]

    def fit(self, data: Any) -> "ScoredModel": ...

    def score(self, rows: np.ndarray) -> np.ndarray: ...

    def to_dict(self) -> dict: ...


def as_rows(rows: np.ndarray, width: int) -> np.ndarray:
    """Coerces a single row or a batch to a float64 ``(n, width)`` matrix."""
    out = np.asarray(rows, dtype=np.float64)
    if out.ndim == 1:
        out = out.reshape(1, -1)
    if out.ndim != 2 or out.shape[1] != width:
        raise NumkitError(f"rows of shape {out.shape} do not have {width} columns")
    return out


class CvResult(BaseModel):
    """Cross-validated AUROC of one model configuration."""

    model: str
    track: Track
    params: dict[str, Any] = Field(default_factory=dict)
    per_fold_auroc: list[float] = Field(default_factory=list)
    pooled_auroc: float | None = None
    mean: float | None = None
    std: float | None = None
    seed: int = 0
    seconds: float = 0.0
    error: str | None = None


class DatasetSummary(BaseModel):
    n_rows: int
    n_fraud: int
    n_normal: int
    source: str


class BenchmarkReport(BaseModel):
    """Everything one benchmark run produced; serialised to report.json."""

    config: dict[str, Any]
    dataset_summary: DatasetSummary
    results: list[CvResult]
    # mean pooled AUROC per track, over models that scored
    track_means: dict[str, float] = Field(default_factory=dict)
    supervised_beats_unsupervised: bool | None = None
    artifacts: dict[str, str] = Field(default_factory=dict)
    log_type: Literal["benchmark_report"] = "benchmark_report"
    service_name: Literal["fraudbench"] = "fraudbench"

    def by_track(self, track: Track) -> list[CvResult]:
        return [r for r in self.results if r.track == track]
