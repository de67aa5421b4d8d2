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

"""Benchmark configuration: pydantic models stored as YAML."""

import logging
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from fraudbench.data import DEFAULT_SCALE_COLUMNS, PCA_COLUMNS
from fraudbench.errors import ConfigError
from fraudbench.registry import MODELS, get_spec
from fraudbench.utils.typing import Track

logger = logging.getLogger(__name__)


class SyntheticSpec(BaseModel):
    """Parameters of the Gaussian stand-in dataset."""

    n_normal: int = Field(default=5000, ge=0)
    n_fraud: int = Field(default=500, ge=0)
    separation: float = Field(default=4.0, ge=0.0)
    dims: int = Field(default=30, ge=1)


class ModelEntry(BaseModel):
    """One model to benchmark, with an optional hyperparameter grid.

    An empty grid runs the shipped defaults only, unless ``search`` is set,
    in which case the model's registry grid is searched.
    """

    name: str
    grid: dict[str, list[Any]] = Field(default_factory=dict)
    params: dict[str, Any] = Field(default_factory=dict)
    search: bool = False
    track: Track | None = None

    def search_grid(self) -> dict[str, list[Any]]:
        """The grid to search: the explicit one, else the registry's when ``search``."""
        if self.grid:
            return dict(self.grid)
        if self.search:
            return {key: list(values) for key, values in get_spec(self.name).grid.items()}
        return {}

    @model_validator(mode="after")
    def _fill_track(self) -> "ModelEntry":
        spec = get_spec(self.name)
        if self.track is None:
            self.track = spec.track
        elif self.track != spec.track:
            raise ValueError(f"model {self.name!r} belongs to the {spec.track} track")
        return self


def default_models() -> list[ModelEntry]:
    return [ModelEntry(name=spec.name) for spec in MODELS]


class BenchmarkConfig(BaseModel):
    dataset: str | None = None
    synthetic: SyntheticSpec | None = None
    models: list[ModelEntry] = Field(default_factory=default_models, min_length=1)
    k: int = Field(default=5, ge=2)
    seed: int
    output_dir: str = "results"
    alpha: float = Field(default=0.9, ge=0.0, le=1.0)
    ocsvm_max_train: int = Field(default=20_000, ge=1)
    nn_max_train: int = Field(default=50_000, ge=1)
    scale_columns: list[str] = Field(default_factory=lambda: list(DEFAULT_SCALE_COLUMNS))
    gan_columns: list[str] = Field(default_factory=lambda: list(PCA_COLUMNS))
    n_jobs: int = 1
    record_timings: bool = True
    # false accepts any feature header that ends with Class
    strict_schema: bool = True

    @model_validator(mode="after")
    def _one_source(self) -> "BenchmarkConfig":
        if (self.dataset is None) == (self.synthetic is None):
            raise ValueError("exactly one of 'dataset' or 'synthetic' must be set")
        names = [m.name for m in self.models]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"models listed more than once: {duplicates}")
        return self


def parse_config(payload: dict[str, Any]) -> BenchmarkConfig:
    try:
        return BenchmarkConfig.model_validate(payload)
    except (ValidationError, ConfigError) as exc:
        raise ConfigError(f"invalid benchmark config: {exc}") from exc


def load_config(path: str | Path) -> BenchmarkConfig:
    """Reads and validates a YAML benchmark config.

    Args:
        path: YAML file holding a mapping.

    Returns:
        The validated BenchmarkConfig.

    Raises:
        ConfigError: missing file, malformed YAML, a non-mapping document or
            a validation failure.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        payload = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")
    return parse_config(payload)


def dump_config(config: BenchmarkConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def save_config(config: BenchmarkConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(config), encoding="utf-8")
    logger.info(f"Wrote config to {path}")
    return path
