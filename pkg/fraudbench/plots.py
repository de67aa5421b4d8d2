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

"""Bar charts of class balance and per-model AUROC, written as SVG."""

import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from fraudbench.errors import PlotError  # noqa: E402
from fraudbench.utils.typing import BenchmarkReport  # noqa: E402

logger = logging.getLogger(__name__)

CLASS_COUNTS = "class_counts.svg"
SUPERVISED_AUROC = "supervised_auroc.svg"
UNSUPERVISED_AUROC = "unsupervised_auroc.svg"

# fixed ids and no timestamp so identical reports give identical files
_RC = {"svg.hashsalt": "fraudbench", "svg.fonttype": "path"}


def _bar_chart(
    labels: Sequence[str],
    values: Sequence[float],
    title: str,
    ylabel: str,
    fmt: str,
    path: Path,
    ylim: tuple[float, float] | None = None,
) -> Path:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4))
        try:
            bars = ax.bar(list(labels), list(values), color="#4472c4")
            ax.bar_label(bars, fmt=fmt, padding=2)
            ax.set_title(title)
            ax.set_ylabel(ylabel)
            if ylim is not None:
                ax.set_ylim(*ylim)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise PlotError(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)
    return path


def emit_plots(report: BenchmarkReport, out_dir: str | Path) -> dict[str, Path]:
    """Writes the class-count chart and one AUROC chart per track present."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PlotError(f"cannot create plot directory {out_dir}: {exc}") from exc

    summary = report.dataset_summary
    paths = {
        "class_counts": _bar_chart(
            ["Normal", "Fraud"],
            [summary.n_normal, summary.n_fraud],
            "Number of transactions per class",
            "Transactions",
            "{:,.0f}",
            out_dir / CLASS_COUNTS,
        )
    }
    for track, filename in (("supervised", SUPERVISED_AUROC), ("unsupervised", UNSUPERVISED_AUROC)):
        scored = [r for r in report.by_track(track) if r.pooled_auroc is not None]
        if not scored:
            logger.info(f"No {track} results in the report; skipping {filename}")
            continue
        paths[f"{track}_auroc"] = _bar_chart(
            [r.model.upper() for r in scored],
            [r.pooled_auroc for r in scored if r.pooled_auroc is not None],
            f"AUROC of {track} models",
            "AUROC",
            "%.3f",
            out_dir / filename,
            ylim=(0.0, 1.05),
        )
    return paths
