"""Slow, literal reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np


def loss_oracle(z, tau):
    """Mean contrastive loss by explicit double loops over the 4B views."""
    z = np.asarray(z, dtype=np.float64)
    n = len(z)
    b = n // 4
    total = 0.0
    for a in range(n):
        block, i = divmod(a, b)
        partner = {0: 1, 1: 0, 2: 3, 3: 2}[block] * b + i
        num = 0.0
        den = 0.0
        for k in range(n):
            if k == a:
                continue
            c = float(np.dot(z[a], z[k]) / (np.linalg.norm(z[a]) * np.linalg.norm(z[k])))
            e = math.exp(c / tau)
            den += e
            if k == partner:
                num = e
        total += -math.log(num / den)
    return total / n


def finite_difference(f, z, eps=1e-6):
    z = np.array(z, dtype=np.float64)
    g = np.zeros_like(z)
    for idx in np.ndindex(z.shape):
        old = z[idx]
        z[idx] = old + eps
        hi = f(z)
        z[idx] = old - eps
        lo = f(z)
        z[idx] = old
        g[idx] = (hi - lo) / (2 * eps)
    return g


def convolve_naive(plane, kernel):
    """Correlation-free 2-D convolution with reflect-101 borders, one pixel at a time."""
    h, w = plane.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2

    def refl(i, n):
        if n == 1:
            return 0
        period = 2 * n - 2
        i = abs(i) % period
        return period - i if i >= n else i

    out = np.zeros_like(plane, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-ry, ry + 1):
                for dx in range(-rx, rx + 1):
                    acc += kernel[ry - dy, rx - dx] * plane[refl(y + dy, h), refl(x + dx, w)]
            out[y, x] = acc
    return out


def multiotsu_bruteforce(hist, n_classes):
    """Best class starts by trying every threshold combination."""
    hist = np.asarray(hist, dtype=np.float64)
    n = len(hist)
    idx = np.arange(n, dtype=np.float64)
    best, best_cuts = -1.0, None
    for cuts in itertools.combinations(range(1, n), n_classes - 1):
        edges = (0,) + cuts + (n,)
        score = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            wgt = hist[lo:hi].sum()
            if wgt > 0:
                s = (hist[lo:hi] * idx[lo:hi]).sum()
                score += s * s / wgt
        if score > best + 1e-9:
            best, best_cuts = score, cuts
    return best, np.array(best_cuts)


def gmad_bruteforce(defender, attacker, n_levels):
    """Sort by defender, slice into equal-count bins, scan each bin for attacker extremes."""
    n = len(defender)
    order = sorted(range(n), key=lambda i: (defender[i], i))
    out = []
    for k in range(n_levels):
        members = [order[r] for r in range(n) if r * n_levels // n == k]
        lo = members[0]
        hi = members[0]
        for m in sorted(members):
            if attacker[m] < attacker[lo] or (attacker[m] == attacker[lo] and m < lo):
                lo = m
            if attacker[m] > attacker[hi] or (attacker[m] == attacker[hi] and m < hi):
                hi = m
        out.append((k, lo, hi))
    return out
