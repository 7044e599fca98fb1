"""End-to-end desk-scale run: degrade a corpus, embed, train the projector, measure retrieval."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..degradation import PRISTINE, DegradeConfig, make_rng, sample_composition
from ..distortions import LadderTable
from ..errors import InvalidArgument
from .batch import TrainingBatch, build_training_batch
from .features import batch_features
from .projector import Projector, fit_standardizer, train_projector
from .retrieval import chance_level, retrieval_accuracy

log = logging.getLogger(__name__)


@dataclass
class DemoResult:
    loss_trace: list[float]
    projector: Projector | None
    chance: float
    untrained_accuracy: float
    trained_accuracy: float | None
    heldout: list[TrainingBatch]  # views are projected embeddings
    n_train_images: int
    epochs: int
    stats: dict = field(default_factory=dict)

    @property
    def images_seen(self) -> int:
        """Training images consumed: train set x 2 scales x epochs."""
        return self.n_train_images * 2 * self.epochs

    def report(self) -> dict:
        out = {
            "chance_accuracy": self.chance,
            "untrained_accuracy": self.untrained_accuracy,
            "trained_accuracy": self.trained_accuracy,
            "epochs": self.epochs,
            "n_train_images": self.n_train_images,
            "images_seen": self.images_seen,
        }
        if self.loss_trace:
            out["initial_loss"] = self.loss_trace[0]
            out["final_loss"] = self.loss_trace[-1]
        out.update(self.stats)
        return out


def make_batches(
    images: Sequence[np.ndarray],
    batch_size: int,
    patch: int,
    rng: np.random.Generator,
    config: DegradeConfig,
    rounds: int = 1,
    ladders: LadderTable | None = None,
) -> list[TrainingBatch]:
    """Pair images at random ``rounds`` times and group the pairs into batches of ``batch_size``."""
    n_pairs = len(images) // 2
    if n_pairs < batch_size:
        raise InvalidArgument(f"{len(images)} images cannot fill a batch of {batch_size} pairs")
    batches = []
    next_id = 0
    for _ in range(rounds):
        order = rng.permutation(len(images))
        pairs = [(images[order[2 * k]], images[order[2 * k + 1]]) for k in range(n_pairs)]
        for start in range(0, n_pairs - batch_size + 1, batch_size):
            chunk = pairs[start : start + batch_size]
            comps = []
            for _ in chunk:
                if rng.random() < config.p_prist:
                    comps.append(PRISTINE)
                else:
                    comps.append(sample_composition(config, rng))
            batches.append(build_training_batch(chunk, comps, patch, rng, ladders, next_id))
            next_id += batch_size
    return batches


def mean_retrieval(batches: Sequence[TrainingBatch], embed) -> float:
    return float(np.mean([retrieval_accuracy(embed(b), b.composition_ids) for b in batches]))


def run_demo(
    train_images: Sequence[np.ndarray],
    heldout_images: Sequence[np.ndarray],
    batch_size: int = 16,
    tau: float = 0.1,
    patch: int = 224,
    epochs: int = 30,
    lr: float = 0.05,
    seed: int = 0,
    rounds: int = 1,
    config: DegradeConfig | None = None,
    ladders: LadderTable | None = None,
    out_dim: int = 16,
    hidden: int = 64,
) -> DemoResult:
    config = config or DegradeConfig(master_seed=seed)
    rng = make_rng(seed)
    train = make_batches(train_images, batch_size, patch, rng, config, rounds, ladders)
    held = make_batches(heldout_images, batch_size, patch, rng, config, 1, ladders)
    log.info("built %d training and %d held-out batches", len(train), len(held))
    train_h = [batch_features(b.views) for b in train]
    held_h = [batch_features(b.views) for b in held]
    feats = {id(b): h for b, h in zip(train + held, train_h + held_h)}

    mean, scale = fit_standardizer(train_h)
    untrained = Projector.init(train_h[0].shape[1], out_dim, hidden, make_rng(seed + 1), mean, scale)
    untrained_acc = mean_retrieval(held, lambda b: untrained(feats[id(b)]))
    chance = chance_level(batch_size)
    if epochs == 0:
        heldout = [b.with_views(untrained(feats[id(b)])) for b in held]
        return DemoResult([], None, chance, untrained_acc, None, heldout, len(train_images), 0)
    proj, trace = train_projector(
        train_h, epochs, lr, tau, make_rng(seed + 1), out_dim=out_dim, hidden=hidden
    )
    trained_acc = mean_retrieval(held, lambda b: proj(feats[id(b)]))
    heldout = [b.with_views(proj(feats[id(b)])) for b in held]
    return DemoResult(trace, proj, chance, untrained_acc, trained_acc, heldout, len(train_images), epochs)
