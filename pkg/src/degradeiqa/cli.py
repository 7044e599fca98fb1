"""Command-line entry point.

Machine-readable results go to stdout or a named file; logs go to stderr.
Exit codes: 0 success, 1 partial failure, 2 invalid usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from .degradation import (
    PRISTINE,
    DegradeConfig,
    count_compositions,
    image_seed,
    make_rng,
    maybe_degrade,
    sample_composition,
)
from .distortions import GROUP_SIZES, KINDS, is_supported, load_ladders
from .errors import DegradeIQAError, InvalidArgument, UnsupportedDistortion
from .imgproc import read_image, write_image
from .manifest import ManifestRecord, write_manifest

log = logging.getLogger("degradeiqa")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}

# per-subcommand defaults; precedence is defaults < --config file < explicit flags
DEFAULTS: dict[str, dict[str, Any]] = {
    "degrade": {
        "seed": 0,
        "workers": None,
        "n_dist": 4,
        "p_prist": 0.05,
        "sigma": 2.5,
        "exclude": [],
        "skip_unsupported": False,
        "ladders": None,
        "manifest": "manifest.jsonl",
    },
    "count": {"sizes": ",".join(map(str, GROUP_SIZES)), "levels": 5, "ndist": 4, "mode": "literal"},
    "sample": {"n": 10, "seed": 0, "n_dist": 4, "sigma": 2.5, "exclude": []},
    "demo-train": {
        "out": "demo_out",
        "batch": 16,
        "tau": 0.1,
        "patch": 224,
        "epochs": 30,
        "lr": 0.05,
        "seed": 0,
        "holdout": 0.2,
        "rounds": 1,
        "n_dist": 4,
        "p_prist": 0.05,
        "sigma": 2.5,
        "ladders": None,
    },
    "embed": {"out": None, "crop": 224},
    "eval": {
        "alpha": 0.1,
        "repeats": 10,
        "seed": 0,
        "cross_test": None,
        "fr": False,
        "sweep": False,
        "out": None,
        "csv": None,
    },
    "gmad": {"levels": 5, "out": None},
    "make-corpus": {"n": 20, "seed": 0, "size": 128},
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option values (flags override it)")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="degradeiqa", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="degrade images and write a JSONL manifest")
    p.add_argument("input", help="image file or directory")
    p.add_argument("output", help="output directory")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--n-dist", dest="n_dist", type=int, default=S)
    p.add_argument("--p-prist", dest="p_prist", type=float, default=S)
    p.add_argument("--sigma", type=float, default=S)
    p.add_argument("--exclude", nargs="*", choices=KINDS, default=S)
    p.add_argument("--skip-unsupported", dest="skip_unsupported", action="store_true", default=S)
    p.add_argument("--ladders", default=S, help="ladder override JSON (env DEGRADEIQA_LADDERS)")
    p.add_argument("--manifest", default=S)
    _add_common(p)

    p = sub.add_parser("count", help="number of possible compositions")
    p.add_argument("--sizes", default=S, help="comma-separated group sizes")
    p.add_argument("--levels", type=int, default=S)
    p.add_argument("--ndist", type=int, default=S)
    p.add_argument("--mode", choices=("literal", "distinct_groups"), default=S)
    _add_common(p)

    p = sub.add_parser("sample", help="print sampled compositions as JSON lines")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--n-dist", dest="n_dist", type=int, default=S)
    p.add_argument("--sigma", type=float, default=S)
    p.add_argument("--exclude", nargs="*", choices=KINDS, default=S)
    _add_common(p)

    p = sub.add_parser("demo-train", help="desk-scale contrastive training demo")
    p.add_argument("corpus", help="directory of pristine images")
    p.add_argument("--out", default=S)
    p.add_argument("--batch", type=int, default=S)
    p.add_argument("--tau", type=float, default=S)
    p.add_argument("--patch", type=int, default=S)
    p.add_argument("--epochs", type=int, default=S)
    p.add_argument("--lr", type=float, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--holdout", type=float, default=S)
    p.add_argument("--rounds", type=int, default=S)
    p.add_argument("--n-dist", dest="n_dist", type=int, default=S)
    p.add_argument("--p-prist", dest="p_prist", type=float, default=S)
    p.add_argument("--sigma", type=float, default=S)
    p.add_argument("--ladders", default=S)
    _add_common(p)

    p = sub.add_parser("embed", help="five-crop two-scale handcrafted features for a MOS dataset")
    p.add_argument("dataset")
    p.add_argument("--out", default=S)
    p.add_argument("--crop", type=int, default=S)
    _add_common(p)

    p = sub.add_parser("eval", help="ridge evaluation protocol")
    p.add_argument("dataset")
    p.add_argument("embeddings")
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--repeats", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--cross-test", dest="cross_test", default=S)
    p.add_argument("--fr", action="store_true", default=S)
    p.add_argument("--sweep", action="store_true", default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--csv", default=S)
    _add_common(p)

    p = sub.add_parser("gmad", help="gMAD pairs between two score tables")
    p.add_argument("scores_a", help="defender CSV (image_path,score)")
    p.add_argument("scores_b", help="attacker CSV (image_path,score)")
    p.add_argument("--levels", type=int, default=S)
    p.add_argument("--out", default=S)
    _add_common(p)

    p = sub.add_parser("make-corpus", help="write procedural pristine images")
    p.add_argument("output")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--size", type=int, default=S)
    _add_common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    given = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    resolved = dict(DEFAULTS[args.command])
    if getattr(args, "config", None):
        try:
            from_file = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgument(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(from_file, dict):
            raise InvalidArgument("config file must hold a JSON object")
        unknown = set(from_file) - set(resolved) - set(given)
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        resolved.update(from_file)
    resolved.update(given)
    return resolved


def _emit(obj: Any, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


# -- degrade -------------------------------------------------------------------


def list_images(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise InvalidArgument(f"input {path} does not exist")
    return sorted(p for p in path.rglob("*") if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _degrade_one(task: tuple) -> dict:
    index, src, out_dir, cfg, ladders = task
    seed = image_seed(cfg.master_seed, index)
    try:
        img = read_image(src)
        rng = make_rng(seed)
        out, outcome = maybe_degrade(img, cfg, rng, ladders)
        stem = Path(src).stem
        if outcome is PRISTINE:
            dst = Path(out_dir) / f"{index:05d}_{stem}{Path(src).suffix.lower()}"
            shutil.copyfile(src, dst)
        else:
            dst = Path(out_dir) / f"{index:05d}_{stem}.png"
            write_image(dst, out)
        # output paths are stored relative to the output directory so manifests are location-independent
        rec = ManifestRecord.from_outcome(str(src), dst.name, seed, outcome, ladders, index)
        return {"ok": True, "record": rec.to_dict()}
    except UnsupportedDistortion as exc:
        return {"ok": False, "index": index, "source_path": str(src), "error": str(exc)}
    except (OSError, ValueError) as exc:
        return {"ok": False, "index": index, "source_path": str(src), "error": f"{type(exc).__name__}: {exc}"}


def cmd_degrade(args, cfg: dict[str, Any]) -> int:
    ladders = load_ladders(cfg["ladders"])
    excluded = set(cfg["exclude"] or [])
    unsupported = [k for k in KINDS if not is_supported(k)]
    if unsupported and cfg["skip_unsupported"]:
        log.warning("skipping unsupported kinds: %s", ", ".join(unsupported))
        excluded |= set(unsupported)
    config = DegradeConfig(
        n_dist_max=cfg["n_dist"],
        p_prist=cfg["p_prist"],
        sigma=cfg["sigma"],
        excluded_kinds=frozenset(excluded),
        master_seed=cfg["seed"],
    )
    inputs = list_images(Path(args.input))
    if not inputs:
        raise InvalidArgument(f"no images found under {args.input}")
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = cfg["workers"] or os.cpu_count() or 1
    tasks = [(i, str(p), str(out_dir), config, ladders) for i, p in enumerate(inputs)]
    if workers == 1:
        results = [_degrade_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_degrade_one, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    records = [ManifestRecord.from_dict(r["record"]) for r in results if r["ok"]]
    failures = [r for r in results if not r["ok"]]
    write_manifest(out_dir / cfg["manifest"], records)
    if failures:
        with open(out_dir / "errors.jsonl", "w", encoding="utf-8") as fh:
            for f in failures:
                fh.write(json.dumps({k: f[k] for k in ("index", "source_path", "error")}) + "\n")
        for f in failures:
            log.error("%s: %s", f["source_path"], f["error"])
    log.info("degraded %d of %d images", len(records), len(inputs))
    return EXIT_PARTIAL if failures else EXIT_OK


# -- count / sample ------------------------------------------------------------


def cmd_count(args, cfg: dict[str, Any]) -> int:
    try:
        sizes = [int(s) for s in str(cfg["sizes"]).split(",") if s.strip()]
    except ValueError:
        raise InvalidArgument(f"bad --sizes {cfg['sizes']!r}") from None
    print(count_compositions(sizes, cfg["levels"], cfg["ndist"], cfg["mode"]))
    return EXIT_OK


def cmd_sample(args, cfg: dict[str, Any]) -> int:
    config = DegradeConfig(
        n_dist_max=cfg["n_dist"], sigma=cfg["sigma"], excluded_kinds=frozenset(cfg["exclude"] or [])
    )
    rng = make_rng(image_seed(cfg["seed"], 0))
    for _ in range(cfg["n"]):
        comp = sample_composition(config, rng)
        print(json.dumps([{"kind": s.kind, "group": s.group, "level": s.level} for s in comp]))
    return EXIT_OK


# -- demo-train ----------------------------------------------------------------


def cmd_demo_train(args, cfg: dict[str, Any]) -> int:
    from .contrastive import write_embeddings_csv
    from .contrastive.demo import run_demo

    paths = list_images(Path(args.corpus))
    if len(paths) < 4:
        raise InvalidArgument("demo corpus needs at least 4 images")
    images = [read_image(p) for p in paths]
    order = np.random.default_rng(cfg["seed"]).permutation(len(images))
    n_hold = max(2 * cfg["batch"], int(round(cfg["holdout"] * len(images))))
    if n_hold >= len(images):
        raise InvalidArgument(f"corpus of {len(images)} images too small for the held-out split")
    held = [images[i] for i in order[:n_hold]]
    train = [images[i] for i in order[n_hold:]]
    config = DegradeConfig(
        n_dist_max=cfg["n_dist"], p_prist=cfg["p_prist"], sigma=cfg["sigma"], master_seed=cfg["seed"]
    )
    result = run_demo(
        train,
        held,
        batch_size=cfg["batch"],
        tau=cfg["tau"],
        patch=cfg["patch"],
        epochs=cfg["epochs"],
        lr=cfg["lr"],
        seed=cfg["seed"],
        rounds=cfg["rounds"],
        config=config,
        ladders=load_ladders(cfg["ladders"]),
    )
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "loss_trace.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "mean_loss"])
        for e, v in enumerate(result.loss_trace, 1):
            w.writerow([e, repr(v)])
    write_embeddings_csv(out / "embeddings.csv", result.heldout)
    report = result.report()
    _emit(report, str(out / "retrieval.json"))
    _emit(report, None)
    return EXIT_OK


# -- embed / eval --------------------------------------------------------------


def cmd_embed(args, cfg: dict[str, Any]) -> int:
    from .contrastive import handcrafted_features
    from .quality import MosDataset, crop_features

    ds = MosDataset.from_csv(args.dataset)
    paths = []
    for r in ds.rows:
        for p in (r.image_path, r.reference_path):
            if p and p not in paths:
                paths.append(p)
    fh = open(cfg["out"], "w", newline="", encoding="utf-8") if cfg["out"] else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        header_done = False
        for p in paths:
            mat = crop_features(read_image(p), handcrafted_features, cfg["crop"])
            if not header_done:
                w.writerow(["image_path", "crop"] + [f"f{j}" for j in range(mat.shape[1])])
                header_done = True
            for k, row in enumerate(mat):
                w.writerow([p, k] + [repr(float(v)) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def load_feature_table(path: str | Path) -> dict[str, np.ndarray]:
    """``image_path -> (n_rows, F)`` from an embeddings CSV keyed by ``image_path``."""
    from .contrastive import read_embeddings_csv

    meta, feats = read_embeddings_csv(path)
    if meta and "image_path" not in meta[0]:
        raise InvalidArgument(f"{path}: embeddings CSV needs an image_path column")
    base = Path(path).parent
    table: dict[str, list[np.ndarray]] = {}
    for m, f in zip(meta, feats):
        key = os.path.abspath(os.path.join(base, m["image_path"]))
        table.setdefault(key, []).append(f)
    return {k: np.stack(v) for k, v in table.items()}


def cmd_eval(args, cfg: dict[str, Any]) -> int:
    from .quality import MosDataset, alpha_sweep, cross_dataset, evaluate_protocol, FeatureTable

    ds = MosDataset.from_csv(args.dataset)
    table = FeatureTable(load_feature_table(args.embeddings))
    if cfg["cross_test"]:
        other = MosDataset.from_csv(cfg["cross_test"])
        report = cross_dataset(ds, other, table, alpha=cfg["alpha"], fr=cfg["fr"])
        report["mode"] = "cross"
        _emit(report, cfg["out"])
        return EXIT_OK
    res = evaluate_protocol(
        ds, table, alpha=cfg["alpha"], n_repeats=cfg["repeats"], seed=cfg["seed"], fr=cfg["fr"]
    )
    report = res.to_dict()
    report["mode"] = "fr" if cfg["fr"] else "nr"
    if cfg["sweep"]:
        report["alpha_sweep"] = alpha_sweep(
            ds, table, n_repeats=cfg["repeats"], seed=cfg["seed"], fr=cfg["fr"]
        )
    if cfg["csv"]:
        with open(cfg["csv"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["repeat", "seed", "srcc", "plcc"])
            for r in res.per_repeat:
                w.writerow([r["repeat"], r["seed"], repr(r["srcc"]), repr(r["plcc"])])
    _emit(report, cfg["out"])
    return EXIT_OK


# -- gmad ----------------------------------------------------------------------


def _read_scores(path: str) -> dict[str, float]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not {"image_path", "score"} <= set(reader.fieldnames or []):
            raise InvalidArgument(f"{path}: header must contain image_path,score")
        return {r["image_path"]: float(r["score"]) for r in reader}


def cmd_gmad(args, cfg: dict[str, Any]) -> int:
    from .quality import gmad_pairs

    a, b = _read_scores(args.scores_a), _read_scores(args.scores_b)
    keys = [k for k in a if k in b]
    if len(keys) != len(a) or len(keys) != len(b):
        log.warning("using the %d images present in both score tables", len(keys))
    pairs = gmad_pairs([a[k] for k in keys], [b[k] for k in keys], cfg["levels"])
    _emit(
        [
            {
                "level": lv,
                "low_index": lo,
                "high_index": hi,
                "low_image": keys[lo],
                "high_image": keys[hi],
                "attacker_gap": b[keys[hi]] - b[keys[lo]],
            }
            for lv, lo, hi in pairs
        ],
        cfg["out"],
    )
    return EXIT_OK


def cmd_make_corpus(args, cfg: dict[str, Any]) -> int:
    from .synthetic import write_corpus

    paths = write_corpus(args.output, cfg["n"], cfg["seed"], cfg["size"], cfg["size"])
    log.info("wrote %d images to %s", len(paths), args.output)
    return EXIT_OK


COMMANDS = {
    "degrade": cmd_degrade,
    "count": cmd_count,
    "sample": cmd_sample,
    "demo-train": cmd_demo_train,
    "embed": cmd_embed,
    "eval": cmd_eval,
    "gmad": cmd_gmad,
    "make-corpus": cmd_make_corpus,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve_config(args)
        log.info("resolved config: %s", json.dumps({"command": args.command, **cfg}, sort_keys=True))
        return COMMANDS[args.command](args, cfg)
    except (InvalidArgument, DegradeIQAError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
