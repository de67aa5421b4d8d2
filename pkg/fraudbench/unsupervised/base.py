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

"""Helpers shared by the normal-data-only detectors."""

import numpy as np

from fraudbench.data import Dataset
from fraudbench.errors import DataError


def require_normals(data: Dataset, kind: str) -> None:
    """Rejects training sets that contain fraud rows or no rows at all."""
    if data.n_rows == 0:
        raise DataError(f"{kind} needs at least one training row")
    fraud = np.flatnonzero(data.labels == 1)
    if fraud.size:
        raise DataError(
            f"{kind} trains on normal rows only, got {fraud.size} fraud rows",
            row=int(fraud[0]) + 1,
        )
