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

"""Dense auto-encoder scored by reconstruction 2-norm."""

import logging
from typing import ClassVar

import numpy as np

from fraudbench.data import Dataset
from fraudbench.numkit import (
    DEFAULT_BATCH_SIZE,
    DenseNet,
    LossResult,
    OptimizerState,
    backward,
    check_finite,
    forward,
    minibatches,
    mse_loss,
    step,
)
from fraudbench.unsupervised.base import require_normals
from fraudbench.utils.typing import as_rows

logger = logging.getLogger(__name__)


class AutoEncoder:
    """Encoder 16-relu, 32-relu (then an optional linear bottleneck); decoder
    32-relu, 16-relu, linear output."""

    kind: ClassVar[str] = "ae"

    def __init__(
        self,
        encoder_widths: tuple[int, ...] = (16, 32),
        decoder_widths: tuple[int, ...] = (32, 16),
        bottleneck: int | None = 12,
        learning_rate: float = 1e-3,
        epochs: int = 20,
        batch_size: int = DEFAULT_BATCH_SIZE,
        seed: int = 0,
    ) -> None:
        self.encoder_widths = tuple(encoder_widths)
        self.decoder_widths = tuple(decoder_widths)
        self.bottleneck = bottleneck
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.encoder: DenseNet | None = None
        self.decoder: DenseNet | None = None
        self.loss_history: list[float] = []

    def build(self, input_dim: int) -> "AutoEncoder":
        enc_widths = list(self.encoder_widths)
        enc_acts = ["relu"] * len(enc_widths)
        if self.bottleneck is not None:
            enc_widths.append(self.bottleneck)
            enc_acts.append("linear")
        dec_widths = [*self.decoder_widths, input_dim]
        dec_acts = ["relu"] * len(self.decoder_widths) + ["linear"]
        self.encoder = DenseNet.build(input_dim, enc_widths, enc_acts, seed=self.seed)
        self.decoder = DenseNet.build(enc_widths[-1], dec_widths, dec_acts, seed=self.seed + 1)
        return self

    def _nets(self) -> tuple[DenseNet, DenseNet]:
        if self.encoder is None or self.decoder is None:
            raise RuntimeError("auto-encoder is not built")
        return self.encoder, self.decoder

    def parameters(self) -> list[np.ndarray]:
        encoder, decoder = self._nets()
        return encoder.parameters() + decoder.parameters()

    def loss(self, batch: np.ndarray) -> LossResult:
        """Mean squared reconstruction error and its parameter gradients."""
        encoder, decoder = self._nets()
        code, enc_cache = forward(encoder, batch)
        recon, dec_cache = forward(decoder, code)
        value, grad = mse_loss(recon, batch)
        dec_grads = backward(decoder, dec_cache, grad)
        enc_grads = backward(encoder, enc_cache, dec_grads.inputs)
        return LossResult(value, enc_grads.params + dec_grads.params, [enc_cache, dec_cache])

    def reconstruct(self, rows: np.ndarray) -> np.ndarray:
        encoder, decoder = self._nets()
        return decoder(encoder(as_rows(rows, encoder.input_dim)))

    def fit(self, data: Dataset) -> "AutoEncoder":
        require_normals(data, self.kind)
        self.build(data.n_cols)
        x = data.features
        rng = np.random.default_rng(self.seed)
        state = OptimizerState(kind="adam", learning_rate=self.learning_rate)
        params = self.parameters()
        self.loss_history = []
        for epoch in range(1, self.epochs + 1):
            total = 0.0
            for idx in minibatches(data.n_rows, self.batch_size, rng):
                result = self.loss(x[idx])
                step(params, result.grads, state)
                total += result.value * idx.size
            check_finite(self.kind, *self._nets())
            self.loss_history.append(total / data.n_rows)
            logger.debug(f"ae epoch {epoch}: loss {self.loss_history[-1]:.6f}")
        return self

    def score(self, rows: np.ndarray) -> np.ndarray:
        encoder, _ = self._nets()
        rows = as_rows(rows, encoder.input_dim)
        return np.linalg.norm(rows - self.reconstruct(rows), axis=1)

    def to_dict(self) -> dict:
        encoder, decoder = self._nets()
        return {
            "encoder_widths": list(self.encoder_widths),
            "decoder_widths": list(self.decoder_widths),
            "bottleneck": self.bottleneck,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "encoder": encoder.to_dict(),
            "decoder": decoder.to_dict(),
            "loss_history": list(self.loss_history),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AutoEncoder":
        model = cls(
            tuple(payload["encoder_widths"]),
            tuple(payload["decoder_widths"]),
            payload["bottleneck"],
            payload["learning_rate"],
            payload["epochs"],
            payload["batch_size"],
            payload["seed"],
        )
        model.encoder = DenseNet.from_dict(payload["encoder"])
        model.decoder = DenseNet.from_dict(payload["decoder"])
        model.loss_history = [float(v) for v in payload["loss_history"]]
        return model
