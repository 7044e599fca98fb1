"""Multi-level Otsu thresholds by exact dynamic programming over a histogram.

Maximizing the between-class variance over contiguous classes is equivalent to
maximizing ``sum_k S_k**2 / W_k`` (``W_k`` class weight, ``S_k`` weighted value
sum), which decomposes over segments.  The DP is ``O(K * n**2)`` for ``K``
classes and ``n`` bins, against ``O(n**(K-1))`` for exhaustive search.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument


def _segment_scores(hist: np.ndarray) -> np.ndarray:
    """``score[i, j]`` for the class spanning bins ``i..j`` (``-inf`` when ``i > j``)."""
    n = hist.size
    w = np.concatenate([[0.0], np.cumsum(hist)])
    s = np.concatenate([[0.0], np.cumsum(hist * np.arange(n))])
    W = w[None, 1:] - w[:-1, None]
    S = s[None, 1:] - s[:-1, None]
    score = np.divide(S * S, W, out=np.zeros_like(W), where=W > 0)
    score[np.tril_indices(n, -1)] = -np.inf
    return score


def multiotsu_cuts(hist, n_classes: int) -> np.ndarray:
    """Return the first bin index of classes 2..K (length ``K - 1``, increasing)."""
    hist = np.asarray(hist, dtype=np.float64)
    n = hist.size
    if n_classes < 2:
        raise InvalidArgument("need at least two classes")
    if n < n_classes:
        raise InvalidArgument(f"{n} bins cannot hold {n_classes} classes")
    score = _segment_scores(hist)
    best = score[0].copy()  # best[j]: one class covering bins 0..j
    back = []
    for _ in range(1, n_classes):
        # candidate[i, j]: previous classes end at i-1, new class is i..j
        prev = np.concatenate([[-np.inf], best[:-1]])
        cand = prev[:, None] + score
        arg = np.argmax(cand, axis=0)
        best = cand[arg, np.arange(n)]
        back.append(arg)
    cuts = []
    j = n - 1
    for arg in reversed(back):
        i = int(arg[j])
        cuts.append(i)
        j = i - 1
    return np.array(cuts[::-1], dtype=int)


def between_class_score(hist, cuts) -> float:
    """Objective ``sum_k S_k**2 / W_k`` for the given cut positions."""
    hist = np.asarray(hist, dtype=np.float64)
    edges = [0, *[int(c) for c in cuts], hist.size]
    vals = np.arange(hist.size)
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        wk = hist[a:b].sum()
        if wk > 0:
            total += (hist[a:b] @ vals[a:b]) ** 2 / wk
    return total


def quantize_plane(plane: np.ndarray, n_classes: int, n_bins: int = 256) -> np.ndarray:
    """Replace each Multi-Otsu class of a [0, 1] plane by its mean value."""
    bins = np.clip(np.rint(plane * (n_bins - 1)), 0, n_bins - 1).astype(int)
    hist = np.bincount(bins.ravel(), minlength=n_bins)
    cuts = multiotsu_cuts(hist, n_classes)
    labels = np.searchsorted(cuts, bins, side="right")
    sums = np.bincount(labels.ravel(), weights=plane.ravel(), minlength=n_classes)
    counts = np.bincount(labels.ravel(), minlength=n_classes)
    means = np.divide(sums, counts, out=np.zeros(n_classes), where=counts > 0)
    return means[labels]
