from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument


def retrieval_accuracy(embeddings, labels) -> float:
    """Fraction of views whose cosine nearest neighbour (excluding itself) shares their label."""
    z = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    if len(z) != len(labels):
        raise InvalidArgument("one label per embedding required")
    if np.unique(labels).size < 2:
        raise InvalidArgument("retrieval needs at least two distinct labels")
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise InvalidArgument("zero-norm embedding")
    u = z / norms
    sim = u @ u.T
    np.fill_diagonal(sim, -np.inf)
    nearest = np.argmax(sim, axis=1)
    return float(np.mean(labels[nearest] == labels))


def chance_level(b: int) -> float:
    """Expected accuracy of random embeddings: 3 same-label views among 4B - 1 others."""
    return 3.0 / (4 * b - 1)
