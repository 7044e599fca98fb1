"""Training batches of 4B patches: 2 sources x 2 scales x B compositions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..degradation import PRISTINE, apply_composition
from ..distortions import LadderTable
from ..errors import InvalidArgument
from ..imgproc import random_crop, resize

# view blocks in storage order: (source, scale)
BLOCKS = ((1, "full"), (2, "full"), (1, "half"), (2, "half"))


@dataclass
class TrainingBatch:
    """Views stored block-major: index ``block * B + i`` with blocks as in :data:`BLOCKS`."""

    views: np.ndarray  # (4B, ...) patches or embeddings
    composition_ids: np.ndarray  # (4B,)
    sources: np.ndarray
    scales: np.ndarray
    pair_index: np.ndarray

    @property
    def batch_size(self) -> int:
        return len(self.views) // 4

    def with_views(self, views: np.ndarray) -> "TrainingBatch":
        if len(views) != len(self.views):
            raise InvalidArgument("replacement views must keep the 4B layout")
        return TrainingBatch(
            np.asarray(views), self.composition_ids, self.sources, self.scales, self.pair_index
        )


def batch_layout(b: int, first_id: int = 0):
    """``(composition_ids, sources, scales, pair_index)`` arrays for ``4b`` views."""
    pair = np.tile(np.arange(b), 4)
    sources = np.repeat([s for s, _ in BLOCKS], b)
    scales = np.repeat([sc for _, sc in BLOCKS], b)
    return pair + first_id, sources, scales, pair


def build_training_batch(
    pristine_pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    comps: Sequence,
    patch: int,
    rng: np.random.Generator,
    ladders: LadderTable | None = None,
    first_id: int = 0,
) -> TrainingBatch:
    """Crop both images of each pair at full and half scale, then degrade all four crops equally.

    The four crops of pair ``i`` are degraded by ``comps[i]`` with identically
    seeded generators, so stochastic kinds draw the same realization for each.
    ``comps[i]`` may be :data:`PRISTINE`.
    """
    b = len(pristine_pairs)
    if b < 1 or len(comps) != b:
        raise InvalidArgument("need one composition per image pair")
    for i, pair in enumerate(pristine_pairs):
        for s, img in enumerate(pair, 1):
            h, w = np.asarray(img).shape[:2]
            if h < 2 * patch or w < 2 * patch:
                raise InvalidArgument(
                    f"image (pair {i}, source {s}) is {w}x{h}; need at least {2 * patch}px per side"
                )
    full, half = [[], []], [[], []]
    for i, (x1, x2) in enumerate(pristine_pairs):
        crops = []
        for img in (x1, x2):
            crops.append(random_crop(img, patch, rng)[0])
        for img in (x1, x2):
            h, w = np.asarray(img).shape[:2]
            crops.append(random_crop(resize(img, w // 2, h // 2, "bilinear"), patch, rng)[0])
        seed = int(rng.integers(0, 2**63))
        comp = comps[i]
        if comp is not PRISTINE:
            crops = [apply_composition(c, comp, np.random.default_rng(seed), ladders) for c in crops]
        full[0].append(crops[0])
        full[1].append(crops[1])
        half[0].append(crops[2])
        half[1].append(crops[3])
    views = np.stack(full[0] + full[1] + half[0] + half[1])
    return TrainingBatch(views, *batch_layout(b, first_id))
