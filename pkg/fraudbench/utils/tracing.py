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

import logging

from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider, export
from opentelemetry.sdk.trace.export import ConsoleSpanExporter

logger = logging.getLogger(__name__)

_provider: TracerProvider | None = None


def configure_tracing(console: bool = False) -> TracerProvider:
    """Installs the process-wide tracer provider once.

    Spans are only exported when ``console`` is set; otherwise they are
    recorded and dropped.
    """
    global _provider
    if _provider is None:
        _provider = TracerProvider()
        trace.set_tracer_provider(_provider)
    if console:
        _provider.add_span_processor(export.SimpleSpanProcessor(ConsoleSpanExporter()))
        logger.debug("Console span exporter attached")
    return _provider
