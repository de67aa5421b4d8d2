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

"""Encoder / generator / discriminator triple trained adversarially.

The discriminator sees joint pairs: ``(x, E(x))`` from the data and
``(G(z), z)`` from the prior. After training, a row is scored by how badly
``G(E(x))`` reconstructs it and by how unconvinced the discriminator is that
``(x, E(x))`` is real. No latent search happens at test time.
"""

import logging
from typing import ClassVar

import numpy as np
from scipy.special import expit

from fraudbench.data import Dataset
from fraudbench.numkit import (
    DEFAULT_BATCH_SIZE,
    DenseNet,
    LossResult,
    OptimizerState,
    backward,
    bce_with_logits,
    check_finite,
    forward,
    minibatches,
    step,
)
from fraudbench.unsupervised.base import require_normals
from fraudbench.utils.typing import as_rows

logger = logging.getLogger(__name__)

COLLAPSE_THRESHOLD = 1e-3
COLLAPSE_PATIENCE = 10


class AdversarialDetector:
    kind: ClassVar[str] = "gan"

    def __init__(
        self,
        latent_dim: int = 32,
        alpha: float = 0.9,
        encoder_width: int = 32,
        generator_widths: tuple[int, int] = (32, 64),
        discriminator_width: int = 32,
        learning_rate: float = 1e-3,
        epochs: int = 20,
        batch_size: int = DEFAULT_BATCH_SIZE,
        seed: int = 0,
    ) -> None:
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        self.latent_dim = latent_dim
        self.alpha = alpha
        self.encoder_width = encoder_width
        self.generator_widths = tuple(generator_widths)
        self.discriminator_width = discriminator_width
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.encoder: DenseNet | None = None
        self.generator: DenseNet | None = None
        self.discriminator: DenseNet | None = None
        self.history: list[dict[str, float]] = []
        self.best_epoch = 0
        self.collapsed = False

    def build(self, input_dim: int) -> "AdversarialDetector":
        z = self.latent_dim
        self.encoder = DenseNet.build(input_dim, [self.encoder_width, z], ["leaky_relu", "linear"], seed=self.seed)
        self.generator = DenseNet.build(
            z, [*self.generator_widths, input_dim], ["relu", "relu", "linear"], seed=self.seed + 1
        )
        self.discriminator = DenseNet.build(
            input_dim + z, [self.discriminator_width, 1], ["leaky_relu", "linear"], seed=self.seed + 2
        )
        return self

    def _nets(self) -> tuple[DenseNet, DenseNet, DenseNet]:
        if self.encoder is None or self.generator is None or self.discriminator is None:
            raise RuntimeError("GAN is not built")
        return self.encoder, self.generator, self.discriminator

    @property
    def input_dim(self) -> int:
        return self._nets()[0].input_dim

    def generator_parameters(self) -> list[np.ndarray]:
        """Encoder then generator parameters: the side that tries to fool D."""
        encoder, generator, _ = self._nets()
        return encoder.parameters() + generator.parameters()

    def discriminator_objective(self, x: np.ndarray, z: np.ndarray) -> LossResult:
        """BCE(D(x, E(x)), 1) + BCE(D(G(z), z), 0) with gradients for D only."""
        encoder, generator, disc = self._nets()
        code, enc_cache = forward(encoder, x)
        fake, gen_cache = forward(generator, z)
        real_logit, real_cache = forward(disc, np.hstack([x, code]))
        fake_logit, fake_cache = forward(disc, np.hstack([fake, z]))
        real_loss, real_grad = bce_with_logits(real_logit, np.ones_like(real_logit))
        fake_loss, fake_grad = bce_with_logits(fake_logit, np.zeros_like(fake_logit))
        g_real = backward(disc, real_cache, real_grad).params
        g_fake = backward(disc, fake_cache, fake_grad).params
        grads = [a + b for a, b in zip(g_real, g_fake, strict=True)]
        return LossResult(
            real_loss + fake_loss, grads, [enc_cache, gen_cache, real_cache, fake_cache]
        )

    def generator_objective(self, x: np.ndarray, z: np.ndarray) -> LossResult:
        """Non-saturating BCE(D(G(z), z), 1) + BCE(D(x, E(x)), 0) for E and G."""
        encoder, generator, disc = self._nets()
        d = x.shape[1]
        code, enc_cache = forward(encoder, x)
        fake, gen_cache = forward(generator, z)
        real_logit, real_cache = forward(disc, np.hstack([x, code]))
        fake_logit, fake_cache = forward(disc, np.hstack([fake, z]))
        fake_loss, fake_grad = bce_with_logits(fake_logit, np.ones_like(fake_logit))
        real_loss, real_grad = bce_with_logits(real_logit, np.zeros_like(real_logit))
        d_fake_input = backward(disc, fake_cache, fake_grad).inputs
        d_real_input = backward(disc, real_cache, real_grad).inputs
        gen_grads = backward(generator, gen_cache, d_fake_input[:, :d]).params
        enc_grads = backward(encoder, enc_cache, d_real_input[:, d:]).params
        return LossResult(
            fake_loss + real_loss,
            enc_grads + gen_grads,
            [enc_cache, gen_cache, real_cache, fake_cache],
        )

    def _snapshot(self) -> tuple[DenseNet, DenseNet, DenseNet]:
        encoder, generator, disc = self._nets()
        return encoder.copy(), generator.copy(), disc.copy()

    def fit(self, data: Dataset) -> "AdversarialDetector":
        require_normals(data, self.kind)
        self.build(data.n_cols)
        x = data.features
        rng = np.random.default_rng(self.seed)
        d_state = OptimizerState(kind="adam", learning_rate=self.learning_rate, beta1=0.5)
        g_state = OptimizerState(kind="adam", learning_rate=self.learning_rate, beta1=0.5)
        d_params = self._nets()[2].parameters()
        g_params = self.generator_parameters()

        self.history = []
        self.collapsed = False
        best, best_recon, self.best_epoch = self._snapshot(), np.inf, 0
        quiet_epochs = 0
        for epoch in range(1, self.epochs + 1):
            d_total = g_total = 0.0
            for idx in minibatches(data.n_rows, self.batch_size, rng):
                batch = x[idx]
                z = rng.standard_normal((idx.size, self.latent_dim))
                d_result = self.discriminator_objective(batch, z)
                step(d_params, d_result.grads, d_state)
                g_result = self.generator_objective(batch, z)
                step(g_params, g_result.grads, g_state)
                d_total += d_result.value * idx.size
                g_total += g_result.value * idx.size
            check_finite(self.kind, *self._nets())

            recon = float(self.reconstruction_loss(x).mean())
            d_loss, g_loss = d_total / data.n_rows, g_total / data.n_rows
            self.history.append({"d_loss": d_loss, "g_loss": g_loss, "recon": recon})
            logger.debug(f"gan epoch {epoch}: d={d_loss:.5f} g={g_loss:.5f} recon={recon:.5f}")
            if recon < best_recon:
                best, best_recon, self.best_epoch = self._snapshot(), recon, epoch

            quiet_epochs = quiet_epochs + 1 if d_loss < COLLAPSE_THRESHOLD else 0
            if quiet_epochs >= COLLAPSE_PATIENCE:
                self.collapsed = True
                logger.warning(
                    f"GAN discriminator loss stayed below {COLLAPSE_THRESHOLD} for "
                    f"{COLLAPSE_PATIENCE} epochs; stopping at epoch {epoch}"
                )
                break

        self.encoder, self.generator, self.discriminator = best
        return self

    def _real_logits(self, rows: np.ndarray) -> np.ndarray:
        encoder, _, disc = self._nets()
        rows = as_rows(rows, encoder.input_dim)
        return disc(np.hstack([rows, encoder(rows)]))[:, 0]

    def reconstruction_loss(self, rows: np.ndarray) -> np.ndarray:
        """L1 distance between x and G(E(x))."""
        encoder, generator, _ = self._nets()
        rows = as_rows(rows, encoder.input_dim)
        return np.abs(rows - generator(encoder(rows))).sum(axis=1)

    def discriminator_loss(self, rows: np.ndarray) -> np.ndarray:
        """Cross-entropy of D(x, E(x)) against the "real" label."""
        return np.logaddexp(0.0, -self._real_logits(rows))

    def discriminator_probability(self, rows: np.ndarray) -> np.ndarray:
        return expit(self._real_logits(rows))

    @staticmethod
    def combine(l_g: np.ndarray | float, l_d: np.ndarray | float, alpha: float) -> np.ndarray:
        """Anomaly score ``alpha * l_g + (1 - alpha) * l_d``.

        Args:
            l_g: reconstruction loss per row.
            l_d: discriminator loss per row.
            alpha: weight of the reconstruction term, in [0, 1].
        """
        return alpha * np.asarray(l_g, dtype=np.float64) + (1.0 - alpha) * np.asarray(
            l_d, dtype=np.float64
        )

    def score(self, rows: np.ndarray) -> np.ndarray:
        return self.combine(
            self.reconstruction_loss(rows), self.discriminator_loss(rows), self.alpha
        )

    def to_dict(self) -> dict:
        encoder, generator, disc = self._nets()
        return {
            "latent_dim": self.latent_dim,
            "alpha": self.alpha,
            "encoder_width": self.encoder_width,
            "generator_widths": list(self.generator_widths),
            "discriminator_width": self.discriminator_width,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "encoder": encoder.to_dict(),
            "generator": generator.to_dict(),
            "discriminator": disc.to_dict(),
            "history": self.history,
            "best_epoch": self.best_epoch,
            "collapsed": self.collapsed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AdversarialDetector":
        model = cls(
            payload["latent_dim"],
            payload["alpha"],
            payload["encoder_width"],
            tuple(payload["generator_widths"]),
            payload["discriminator_width"],
            payload["learning_rate"],
            payload["epochs"],
            payload["batch_size"],
            payload["seed"],
        )
        model.encoder = DenseNet.from_dict(payload["encoder"])
        model.generator = DenseNet.from_dict(payload["generator"])
        model.discriminator = DenseNet.from_dict(payload["discriminator"])
        model.history = [dict(item) for item in payload["history"]]
        model.best_epoch = int(payload["best_epoch"])
        model.collapsed = bool(payload["collapsed"])
        return model
