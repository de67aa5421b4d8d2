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

import pytest

from fraudbench.errors import PlotError
from fraudbench.plots import CLASS_COUNTS, SUPERVISED_AUROC, UNSUPERVISED_AUROC, emit_plots
from fraudbench.utils.typing import BenchmarkReport, CvResult, DatasetSummary


def _report(with_unsupervised: bool = True) -> BenchmarkReport:
    results = [
        CvResult(model="lr", track="supervised", pooled_auroc=0.97),
        CvResult(model="xgb", track="supervised", pooled_auroc=0.98),
        CvResult(model="svm", track="supervised", error="RuntimeError: boom"),
    ]
    if with_unsupervised:
        results.append(CvResult(model="ae", track="unsupervised", pooled_auroc=0.94))
    return BenchmarkReport(
        config={"seed": 0},
        dataset_summary=DatasetSummary(
            n_rows=284807, n_fraud=492, n_normal=284315, source="creditcard.csv"
        ),
        results=results,
    )


def test_plots_are_byte_identical_across_runs(tmp_path: Path) -> None:
    first = emit_plots(_report(), tmp_path / "a")
    second = emit_plots(_report(), tmp_path / "b")
    assert sorted(first) == ["class_counts", "supervised_auroc", "unsupervised_auroc"]
    for name, path in first.items():
        assert path.read_bytes() == second[name].read_bytes()
        assert path.read_bytes().lstrip().startswith(b"<?xml")


def test_missing_track_has_no_chart(tmp_path: Path) -> None:
    paths = emit_plots(_report(with_unsupervised=False), tmp_path)
    assert paths["class_counts"].name == CLASS_COUNTS
    assert paths["supervised_auroc"].name == SUPERVISED_AUROC
    assert not (tmp_path / UNSUPERVISED_AUROC).exists()


def test_unwritable_directory(tmp_path: Path) -> None:
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(PlotError):
        emit_plots(_report(), blocker / "plots")
