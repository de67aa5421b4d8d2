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

"""Exceptions raised by fraudbench."""


class FraudBenchError(Exception):
    """Base class for every error the benchmark reports to the user."""


class DataError(FraudBenchError, ValueError):
    """Malformed input data, optionally pinned to a row and column."""

    def __init__(
        self, message: str, row: int | None = None, column: str | None = None
    ) -> None:
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column!r}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.row = row
        self.column = column


class DatasetNotFoundError(FraudBenchError, FileNotFoundError):
    def __init__(self, path: str) -> None:
        super().__init__(f"Dataset not found: {path}")
        self.path = path


class NumkitError(FraudBenchError, ValueError):
    """Shape or state mismatch inside the neural-network kernel."""


class TrainingDivergedError(FraudBenchError, ArithmeticError):
    """A parameter became non-finite during training."""


class EvaluationError(FraudBenchError, ValueError):
    pass


class FoldError(FraudBenchError):
    def __init__(self, fold: int, cause: BaseException) -> None:
        super().__init__(f"Fold {fold} failed: {cause}")
        self.fold = fold
        self.cause = cause


class ConfigError(FraudBenchError, ValueError):
    pass


class CorruptModelError(FraudBenchError, ValueError):
    pass


class PlotError(FraudBenchError, OSError):
    pass
