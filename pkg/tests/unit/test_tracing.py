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

from opentelemetry.sdk.trace.export import SimpleSpanProcessor
from opentelemetry.sdk.trace.export.in_memory_span_exporter import InMemorySpanExporter

from fraudbench.data import stratified_kfold
from fraudbench.eval import run_fold
from fraudbench.registry import lr
from fraudbench.utils.tracing import configure_tracing
from tests.conftest import blobs


def test_provider_is_installed_once() -> None:
    assert configure_tracing() is configure_tracing()


def test_folds_emit_spans() -> None:
    exporter = InMemorySpanExporter()
    configure_tracing().add_span_processor(SimpleSpanProcessor(exporter))
    data = blobs(20, 2, 3.0, seed=0)
    run_fold(lr, data, stratified_kfold(data, 2, seed=0), 1)

    spans = [s for s in exporter.get_finished_spans() if s.name == "fraudbench.fold"]
    assert spans
    attributes = spans[-1].attributes or {}
    assert attributes["model"] == "lr"
    assert attributes["fold"] == 1
    assert attributes["track"] == "supervised"
    exporter.shutdown()
