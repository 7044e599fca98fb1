"""Embedding dump: ``view_id,source,scale,pair_index,composition_id,f0..f{D-1}``."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

import numpy as np

from ..errors import InvalidArgument
from .batch import TrainingBatch

HEADER = ["view_id", "source", "scale", "pair_index", "composition_id"]


def write_embeddings_csv(path: str | Path, batches: Iterable[TrainingBatch]) -> int:
    """Write the views of every batch (views must be embeddings); returns the row count."""
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = None
        for batch in batches:
            z = np.asarray(batch.views, dtype=np.float64)
            if z.ndim != 2:
                raise InvalidArgument("batch views must be (4B, D) embeddings")
            if writer is None:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(HEADER + [f"f{j}" for j in range(z.shape[1])])
            for k in range(len(z)):
                writer.writerow(
                    [rows, int(batch.sources[k]), batch.scales[k], int(batch.pair_index[k]),
                     int(batch.composition_ids[k])]
                    + [repr(float(v)) for v in z[k]]
                )
                rows += 1
    return rows


def read_embeddings_csv(path: str | Path) -> tuple[list[dict], np.ndarray]:
    """Return per-row metadata dicts and the ``(N, D)`` feature matrix."""
    meta, feats = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fcols = [c for c in reader.fieldnames or [] if c.startswith("f") and c[1:].isdigit()]
        fcols.sort(key=lambda c: int(c[1:]))
        for row in reader:
            meta.append({k: v for k, v in row.items() if k not in fcols})
            feats.append([float(row[c]) for c in fcols])
    return meta, np.asarray(feats, dtype=np.float64).reshape(len(feats), -1)
