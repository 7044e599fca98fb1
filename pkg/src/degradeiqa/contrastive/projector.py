"""Two-layer MLP projector trained by plain gradient descent on the contrastive loss."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InvalidArgument
from .loss import nt_xent_arniqa, nt_xent_gradient


@dataclass
class Projector:
    """``z = W2 relu(W1 standardize(h) + b1) + b2``."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def init(
        cls,
        in_dim: int,
        out_dim: int = 16,
        hidden: int = 64,
        rng: np.random.Generator | None = None,
        mean: np.ndarray | None = None,
        scale: np.ndarray | None = None,
    ) -> "Projector":
        rng = rng if rng is not None else np.random.default_rng(0)
        return cls(
            w1=rng.normal(0.0, np.sqrt(2.0 / in_dim), (in_dim, hidden)),
            b1=np.zeros(hidden),
            w2=rng.normal(0.0, np.sqrt(1.0 / hidden), (hidden, out_dim)),
            b2=np.zeros(out_dim),
            mean=np.zeros(in_dim) if mean is None else np.asarray(mean, dtype=np.float64),
            scale=np.ones(in_dim) if scale is None else np.asarray(scale, dtype=np.float64),
        )

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w2.shape[1]

    def _forward(self, h):
        x = (np.asarray(h, dtype=np.float64) - self.mean) / self.scale
        pre = x @ self.w1 + self.b1
        act = np.maximum(pre, 0.0)
        return x, pre, act, act @ self.w2 + self.b2

    def __call__(self, h) -> np.ndarray:
        return self._forward(h)[3]

    def loss_and_grads(self, h, tau: float):
        x, pre, act, z = self._forward(h)
        loss, _ = nt_xent_arniqa(z, tau)
        gz = nt_xent_gradient(z, tau)
        g_w2 = act.T @ gz
        g_b2 = gz.sum(axis=0)
        g_pre = (gz @ self.w2.T) * (pre > 0)
        g_w1 = x.T @ g_pre
        g_b1 = g_pre.sum(axis=0)
        return loss, {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2}


def fit_standardizer(features: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    allf = np.concatenate([np.asarray(f, dtype=np.float64) for f in features])
    mean = allf.mean(axis=0)
    scale = allf.std(axis=0)
    return mean, np.where(scale > 1e-12, scale, 1.0)


def train_projector(
    dataset: Sequence[np.ndarray],
    epochs: int,
    lr: float,
    tau: float = 0.1,
    rng: np.random.Generator | None = None,
    out_dim: int = 16,
    hidden: int = 64,
) -> tuple[Projector, list[float]]:
    """Train on a list of ``(4B, C)`` feature batches.

    Returns the projector and the per-epoch mean loss (each batch's loss is
    taken just before its update).  ``lr = 0`` is allowed and leaves the
    projector frozen.
    """
    if len(dataset) < 2:
        raise InvalidArgument("training needs at least two batches")
    if epochs < 1:
        raise InvalidArgument("epochs must be positive")
    if not lr >= 0:
        raise InvalidArgument("learning rate must be non-negative")
    rng = rng if rng is not None else np.random.default_rng(0)
    mean, scale = fit_standardizer(dataset)
    proj = Projector.init(dataset[0].shape[1], out_dim, hidden, rng, mean, scale)
    trace = []
    for _ in range(epochs):
        losses = []
        for h in dataset:
            loss, grads = proj.loss_and_grads(h, tau)
            losses.append(loss)
            for name, g in grads.items():
                setattr(proj, name, getattr(proj, name) - lr * g)
        trace.append(float(np.mean(losses)))
    return proj, trace
