"""Embedding-to-quality regression and the evaluation harness.

Ridge regression on centered data, rank/linear correlation, reference-disjoint
splits, five-crop two-scale scoring, full-reference difference features, and
gMAD pair selection.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import IllConditioned, InvalidArgument, UndefinedCorrelation
from .imgproc import Rect, crop, read_image, resize

DEFAULT_ALPHA = 0.1
ALPHA_GRID = tuple(10.0**k for k in range(-3, 4))
DEFAULT_RATIOS = (0.7, 0.1, 0.2)


# -- regression --------------------------------------------------------------


@dataclass(frozen=True)
class RegressorModel:
    weights: np.ndarray
    intercept: float
    alpha: float

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return x @ self.weights + self.intercept


def ridge_fit(x, y, alpha: float = DEFAULT_ALPHA) -> RegressorModel:
    """Solve ``(Xc'Xc + alpha I) w = Xc'yc`` on centered data; intercept restores the means."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != y.shape[0] or y.ndim != 1:
        raise InvalidArgument(f"X is {x.shape} but y is {y.shape}")
    if x.shape[0] < 2:
        raise InvalidArgument("ridge needs at least two samples")
    if alpha < 0:
        raise InvalidArgument("alpha must be non-negative")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidArgument("non-finite training data")
    xm, ym = x.mean(axis=0), y.mean()
    xc, yc = x - xm, y - ym
    gram = xc.T @ xc
    if alpha == 0 and np.linalg.matrix_rank(xc) < x.shape[1]:
        raise IllConditioned("rank-deficient design with alpha = 0")
    gram[np.diag_indices_from(gram)] += alpha
    w = np.linalg.solve(gram, xc.T @ yc)
    return RegressorModel(w, float(ym - xm @ w), float(alpha))


# -- correlation -------------------------------------------------------------


def average_ranks(a) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    a = np.asarray(a, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    sorted_a = a[order]
    ranks = np.empty(a.size)
    start = 0
    while start < a.size:
        stop = start + 1
        while stop < a.size and sorted_a[stop] == sorted_a[start]:
            stop += 1
        ranks[order[start:stop]] = 0.5 * (start + stop - 1) + 1.0
        start = stop
    return ranks


def plcc(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidArgument("correlation inputs must be 1-D and equal length")
    if a.size < 2:
        raise InvalidArgument("correlation needs at least two points")
    da, db = a - a.mean(), b - b.mean()
    sa, sb = np.max(np.abs(da)), np.max(np.abs(db))
    if sa == 0 or sb == 0:
        raise UndefinedCorrelation("correlation of a constant input")
    da, db = da / sa, db / sb  # rescale so tiny spreads do not underflow when squared
    na, nb = math.sqrt(da @ da), math.sqrt(db @ db)
    return float(np.clip(da @ db / (na * nb), -1.0, 1.0))


def srcc(a, b) -> float:
    return plcc(average_ranks(a), average_ranks(b))


# -- datasets ----------------------------------------------------------------


@dataclass(frozen=True)
class MosRow:
    image_path: str
    reference_id: str
    mos: float
    reference_path: str | None = None


@dataclass
class MosDataset:
    rows: list[MosRow] = field(default_factory=list)

    def __post_init__(self):
        for r in self.rows:
            if not math.isfinite(r.mos):
                raise InvalidArgument(f"non-finite MOS for {r.image_path}")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def mos(self) -> np.ndarray:
        return np.array([r.mos for r in self.rows])

    @property
    def image_paths(self) -> list[str]:
        return [r.image_path for r in self.rows]

    def reference_ids(self) -> list[str]:
        return sorted({r.reference_id for r in self.rows})

    def subset(self, refs) -> "MosDataset":
        refs = set(refs)
        return MosDataset([r for r in self.rows if r.reference_id in refs])

    @classmethod
    def from_csv(cls, path: str | Path) -> "MosDataset":
        """Read ``image_path,reference_id,mos[,reference_path]``; relative paths resolve against the CSV."""
        base = Path(path).parent
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            need = {"image_path", "reference_id", "mos"}
            if not need <= set(reader.fieldnames or []):
                raise InvalidArgument(f"{path}: header must contain {sorted(need)}")
            for rec in reader:
                ref_path = rec.get("reference_path") or None
                rows.append(
                    MosRow(
                        _resolve(base, rec["image_path"]),
                        rec["reference_id"],
                        float(rec["mos"]),
                        _resolve(base, ref_path) if ref_path else None,
                    )
                )
        return cls(rows)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["image_path", "reference_id", "mos", "reference_path"])
            for r in self.rows:
                w.writerow([r.image_path, r.reference_id, repr(r.mos), r.reference_path or ""])


def _resolve(base: Path, p: str) -> str:
    return os.path.abspath(os.path.join(base, p))


def split_by_reference(
    ds: MosDataset, ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0
) -> tuple[MosDataset, MosDataset, MosDataset]:
    """Random train/val/test split over reference ids.

    Validation and test receive ``floor(ratio * n_refs)`` references, train the rest.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or not math.isclose(sum(ratios), 1.0):
        raise InvalidArgument(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    refs = ds.reference_ids()
    if len(refs) < 3:
        raise InvalidArgument(f"need at least 3 reference images, got {len(refs)}")
    n = len(refs)
    n_val = math.floor(ratios[1] * n + 1e-9)
    n_test = math.floor(ratios[2] * n + 1e-9)
    perm = np.random.default_rng(seed).permutation(n)
    shuffled = [refs[i] for i in perm]
    train = shuffled[: n - n_val - n_test]
    val = shuffled[n - n_val - n_test : n - n_test]
    test = shuffled[n - n_test :]
    return ds.subset(train), ds.subset(val), ds.subset(test)


# -- scoring -----------------------------------------------------------------

FeatureFn = Callable[[np.ndarray], np.ndarray]


def five_crop_rects(w: int, h: int, size: int) -> list[Rect]:
    """Top-left, top-right, bottom-left, bottom-right, center."""
    cx, cy = (w - size) // 2, (h - size) // 2
    return [
        Rect(0, 0, size, size),
        Rect(w - size, 0, size, size),
        Rect(0, h - size, size, size),
        Rect(w - size, h - size, size, size),
        Rect(cx, cy, size, size),
    ]


def crop_features(img: np.ndarray, features: FeatureFn, crop_size: int = 224) -> np.ndarray:
    """``(5, 2C)`` matrix: per crop position, full-scale then half-scale features."""
    a = np.asarray(img)
    h, w = a.shape[:2]
    if min(h // 2, w // 2) < crop_size:
        raise InvalidArgument(
            f"image {w}x{h} too small for {crop_size}px crops at half scale"
        )
    half = resize(a, w // 2, h // 2, "bilinear")
    full_rects = five_crop_rects(w, h, crop_size)
    half_rects = five_crop_rects(w // 2, h // 2, crop_size)
    rows = []
    for rf, rh in zip(full_rects, half_rects):
        f_full = np.asarray(features(crop(a, rf)), dtype=np.float64)
        f_half = np.asarray(features(crop(half, rh)), dtype=np.float64)
        rows.append(np.concatenate([f_full, f_half]))
    return np.stack(rows)


def five_crop_score(
    img: np.ndarray, model: RegressorModel, features: FeatureFn, crop_size: int = 224
) -> float:
    return float(np.mean(model.predict(crop_features(img, features, crop_size))))


def fr_features(h_ref, h_dist) -> np.ndarray:
    """Absolute embedding difference used for full-reference scoring."""
    a = np.asarray(h_ref, dtype=np.float64)
    b = np.asarray(h_dist, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"embedding shapes differ: {a.shape} vs {b.shape}")
    return np.abs(a - b)


# -- gMAD ----------------------------------------------------------------------


def gmad_levels(defender_scores, n_levels: int) -> np.ndarray:
    """Equal-count level of every item: ``floor(rank * K / N)`` over stable defender ranks."""
    d = np.asarray(defender_scores, dtype=np.float64)
    order = np.argsort(d, kind="stable")
    rank = np.empty(d.size, dtype=int)
    rank[order] = np.arange(d.size)
    return rank * n_levels // d.size


def gmad_pairs(defender_scores, attacker_scores, n_levels: int) -> list[tuple[int, int, int]]:
    """Per defender level, the indices of the attacker's lowest and highest scored items."""
    d = np.asarray(defender_scores, dtype=np.float64)
    a = np.asarray(attacker_scores, dtype=np.float64)
    if n_levels < 1:
        raise InvalidArgument("n_levels must be >= 1")
    if d.shape != a.shape or d.ndim != 1:
        raise InvalidArgument("score vectors must be 1-D and equal length")
    if d.size < 2 * n_levels:
        raise InvalidArgument(f"need at least {2 * n_levels} items for {n_levels} levels")
    levels = gmad_levels(d, n_levels)
    out = []
    for k in range(n_levels):
        members = np.flatnonzero(levels == k)
        vals = a[members]
        out.append((k, int(members[np.argmin(vals)]), int(members[np.argmax(vals)])))
    return out


# -- protocol ------------------------------------------------------------------


@dataclass
class ProtocolResult:
    median_srcc: float
    median_plcc: float
    per_repeat: list[dict]
    alpha: float

    def to_dict(self) -> dict:
        return {
            "median_srcc": self.median_srcc,
            "median_plcc": self.median_plcc,
            "alpha": self.alpha,
            "per_repeat": self.per_repeat,
        }


class FeatureTable:
    """Per-image crop features ``(n_crops, F)`` keyed by image path, computed lazily."""

    def __init__(
        self,
        features: FeatureFn | Mapping[str, np.ndarray],
        crop_size: int = 224,
        loader: Callable[[str], np.ndarray] = read_image,
    ):
        self._fn = features if callable(features) else None
        self._table: dict[str, np.ndarray] = {}
        if self._fn is None:
            for k, v in features.items():  # type: ignore[union-attr]
                v = np.asarray(v, dtype=np.float64)
                self._table[k] = v[None, :] if v.ndim == 1 else v
        self.crop_size = crop_size
        self.loader = loader

    def __getitem__(self, path: str) -> np.ndarray:
        if path not in self._table:
            if self._fn is None:
                raise InvalidArgument(f"no features for {path}")
            self._table[path] = crop_features(self.loader(path), self._fn, self.crop_size)
        return self._table[path]

    def rows(self, ds: MosDataset, fr: bool = False) -> list[np.ndarray]:
        """Crop-feature matrices per row; with ``fr`` the reference/distorted difference."""
        out = []
        for r in ds.rows:
            dist = self[r.image_path]
            if fr:
                if not r.reference_path:
                    raise InvalidArgument(f"row {r.image_path} has no reference_path")
                out.append(fr_features(self[r.reference_path], dist))
            else:
                out.append(dist)
        return out


def fit_rows(mats: list[np.ndarray], mos: np.ndarray, alpha: float) -> RegressorModel:
    x = np.stack([m.mean(axis=0) for m in mats])
    return ridge_fit(x, mos, alpha)


def predict_rows(model: RegressorModel, mats: list[np.ndarray]) -> np.ndarray:
    return np.array([float(np.mean(model.predict(m))) for m in mats])


def evaluate_protocol(
    ds: MosDataset,
    features: FeatureFn | Mapping[str, np.ndarray] | FeatureTable,
    alpha: float = DEFAULT_ALPHA,
    n_repeats: int = 10,
    seed: int = 0,
    crop_size: int = 224,
    fr: bool = False,
    on: str = "test",
    ratios: Sequence[float] = DEFAULT_RATIOS,
) -> ProtocolResult:
    """Repeat split / fit / score ``n_repeats`` times and report median SRCC and PLCC.

    Training rows use the crop-averaged features; evaluation rows are scored
    by averaging per-crop predictions.  ``on`` selects the scored split
    (``"test"`` or ``"val"``).
    """
    if n_repeats < 1:
        raise InvalidArgument("n_repeats must be >= 1")
    if on not in ("test", "val"):
        raise InvalidArgument(f"unknown split {on!r}")
    table = features if isinstance(features, FeatureTable) else FeatureTable(features, crop_size)
    seeds = np.random.SeedSequence(seed).generate_state(n_repeats)
    per_repeat = []
    for r, s in enumerate(seeds):
        train, val, test = split_by_reference(ds, ratios, int(s))
        target = test if on == "test" else val
        if len(target) < 2:
            raise InvalidArgument(f"repeat {r}: the {on} split has fewer than 2 rows")
        model = fit_rows(table.rows(train, fr), train.mos, alpha)
        pred = predict_rows(model, table.rows(target, fr))
        per_repeat.append(
            {
                "repeat": r,
                "seed": int(s),
                "srcc": srcc(pred, target.mos),
                "plcc": plcc(pred, target.mos),
                "train_refs": train.reference_ids(),
                "val_refs": val.reference_ids(),
                "test_refs": test.reference_ids(),
            }
        )
    return ProtocolResult(
        median([p["srcc"] for p in per_repeat]),
        median([p["plcc"] for p in per_repeat]),
        per_repeat,
        alpha,
    )


def alpha_sweep(
    ds: MosDataset,
    features,
    alphas: Sequence[float] = ALPHA_GRID,
    on: str = "val",
    **kwargs,
) -> dict:
    """Median SRCC per regularization coefficient plus the best-worst spread."""
    table = features if isinstance(features, FeatureTable) else FeatureTable(
        features, kwargs.pop("crop_size", 224)
    )
    rows = []
    for a in alphas:
        res = evaluate_protocol(ds, table, alpha=a, on=on, **kwargs)
        rows.append({"alpha": a, "median_srcc": res.median_srcc, "median_plcc": res.median_plcc})
    vals = [r["median_srcc"] for r in rows]
    return {"split": on, "rows": rows, "delta": max(vals) - min(vals)}


def cross_dataset(
    train_ds: MosDataset,
    test_ds: MosDataset,
    features,
    alpha: float = DEFAULT_ALPHA,
    crop_size: int = 224,
    fr: bool = False,
) -> dict:
    """Fit on every row of ``train_ds`` and score every row of ``test_ds``."""
    overlap = sorted(set(train_ds.image_paths) & set(test_ds.image_paths))
    if overlap:
        raise InvalidArgument(f"{len(overlap)} images appear in both datasets")
    table = features if isinstance(features, FeatureTable) else FeatureTable(features, crop_size)
    model = fit_rows(table.rows(train_ds, fr), train_ds.mos, alpha)
    pred = predict_rows(model, table.rows(test_ds, fr))
    return {
        "srcc": srcc(pred, test_ds.mos),
        "plcc": plcc(pred, test_ds.mos),
        "alpha": alpha,
        "n_train": len(train_ds),
        "n_test": len(test_ds),
        "overlapping_image_paths": overlap,
    }
