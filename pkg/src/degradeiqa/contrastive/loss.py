"""Contrastive loss over 4B views with half-scale hard negatives, and its gradient.

For an anchor view the positive is the other source at the same scale and
index; the denominator runs over every other view in the batch (the same-image
view at the other scale is therefore always a negative).
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp, softmax

from ..errors import InvalidArgument


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument("embeddings must share a dimension")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise InvalidArgument("cosine similarity of a zero-norm embedding")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def positive_index(b: int) -> np.ndarray:
    """Index of the positive partner of every view in block-major layout."""
    idx = np.arange(4 * b)
    block, i = divmod(idx, b)
    partner = np.array([1, 0, 3, 2])[block]
    return partner * b + i


def _prepare(z, tau):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] % 4:
        raise InvalidArgument("expected a (4B, D) embedding matrix")
    b = z.shape[0] // 4
    if b < 2:
        raise InvalidArgument("batch size B must be at least 2")
    if not tau > 0:
        raise InvalidArgument("temperature must be positive")
    norms = np.linalg.norm(z, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(z)):
        raise InvalidArgument("embeddings must be finite and non-zero")
    u = z / norms[:, None]
    logits = (u @ u.T) / tau
    np.fill_diagonal(logits, -np.inf)
    return z, b, norms, u, logits


def nt_xent_arniqa(z, tau: float = 0.1) -> tuple[float, np.ndarray]:
    """Return ``(loss, per_term)``; ``per_term[a]`` is the term anchored at view ``a``.

    ``loss`` is the mean of the 4B terms.
    """
    _, b, _, _, logits = _prepare(z, tau)
    pos = positive_index(b)
    rows = np.arange(4 * b)
    per_term = logsumexp(logits, axis=1) - logits[rows, pos]
    return float(per_term.mean()), per_term


def nt_xent_gradient(z, tau: float = 0.1) -> np.ndarray:
    """Analytic gradient of the mean loss with respect to every (unnormalized) embedding."""
    z, b, norms, u, logits = _prepare(z, tau)
    n = 4 * b
    coef = softmax(logits, axis=1)
    coef[np.arange(n), positive_index(b)] -= 1.0
    coef /= tau * n
    grad_u = (coef + coef.T) @ u
    radial = np.sum(grad_u * u, axis=1, keepdims=True)
    return (grad_u - radial * u) / norms[:, None]
