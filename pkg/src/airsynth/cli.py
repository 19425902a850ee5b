"""Command-line entry point: generate / stats / validate / preview.

Runs are declared in a JSON config file and/or flags; flags win. Exit codes:
0 success, 2 config error, 3 I/O error, 4 validation failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .annotation import MIN_BOX_SIDE, parse_labels
from .assets import CLASS_BIRD
from .dataset import (DEFAULT_VAL_FRACTION, DatasetPlan, _NAME_RE,
                      compute_stats, generate_dataset, plan_dataset,
                      split_dataset, NON_VFX, VFX, WEATHER, SUBSETS)
from .errors import AirsynthError, ConfigError, EmptyStratum, LayoutInvalid
from .scene import BUCKETS, CONDITIONS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VALIDATION = 4


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="airsynth",
                                description="Procedural aerial detection dataset generator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file (flags override it)")
        sp.add_argument("--out", help="dataset directory")

    g = sub.add_parser("generate", help="plan and generate a dataset")
    common(g)
    g.add_argument("--total", type=int, help="number of images to generate")
    g.add_argument("--workers", type=int, help="parallel render workers")
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--profile", choices=["simd3_proportions", "custom"],
                   help="composition profile")
    g.add_argument("--val-fraction", type=float, dest="val_fraction",
                   help="validation split fraction")
    g.add_argument("--width", type=int, help="image width override")
    g.add_argument("--height", type=int, help="image height override")
    g.add_argument("--no-masks", action="store_true", help="skip segmap output")

    s = sub.add_parser("stats", help="recompute composition tables from disk")
    common(s)

    v = sub.add_parser("validate", help="check layout, labels, and invariants")
    common(v)

    pr = sub.add_parser("preview", help="render sample frames with burned-in boxes")
    common(pr)
    pr.add_argument("--preview-count", type=int, dest="preview_count", default=8)
    return p


def _load_config(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config}: {exc}")
        if not isinstance(cfg, dict):
            raise ConfigError(f"config file {args.config}: expected a JSON object")
    for key in ("out", "total", "workers", "seed", "profile", "val_fraction",
                "width", "height", "preview_count"):
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    if getattr(args, "no_masks", False):
        cfg["write_masks"] = False
    # environment override applies to worker count only
    env_workers = os.environ.get("AIRSYNTH_WORKERS")
    if env_workers:
        cfg["workers"] = int(env_workers)
    return cfg


def cmd_generate(cfg: dict) -> int:
    out = cfg.get("out")
    if not out:
        raise ConfigError("generate requires --out (or 'out' in the config)")
    total = int(cfg.get("total", 100))
    if total < 1:
        raise ConfigError(f"total must be >= 1, got {total}")
    workers = int(cfg.get("workers", 1))
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    plan = plan_dataset(
        total,
        profile=cfg.get("profile", "simd3_proportions"),
        master_seed=int(cfg.get("seed", 0)),
        width=int(cfg.get("width", 1920)),
        height=int(cfg.get("height", 1080)),
        write_masks=bool(cfg.get("write_masks", True)),
    )
    summary = generate_dataset(plan, out, workers=workers)
    try:
        split_dataset(out, float(cfg.get("val_fraction", DEFAULT_VAL_FRACTION)),
                      seed=plan.master_seed)
    except EmptyStratum as exc:
        print(f"warning: split skipped ({exc}); rerun with a larger --total "
              f"or call split_dataset directly", file=sys.stderr)
    print(f"generated {summary.total_images} images into {out} "
          f"in {summary.wall_time:.1f}s")
    _print_tables(summary)
    return EXIT_OK


def _print_tables(summary) -> None:
    sb = summary.subset_bucket_counts()
    print("\nSubset composition (images):")
    print(f"  {'subset':<10}{'drone':>8}{'bird':>8}{'both':>8}{'total':>8}")
    for subset in SUBSETS:
        drone = sb.get((subset, "drone_only"), 0) + sb.get((subset, "vfx_drone"), 0)
        bird = sb.get((subset, "bird_only"), 0)
        both = sb.get((subset, "both"), 0)
        print(f"  {subset:<10}{drone:>8}{bird:>8}{both:>8}{drone + bird + both:>8}")
    print("\nScene distribution (images):")
    sc = summary.scene_counts()
    scenes = sorted({k[1] for k in sc})
    print(f"  {'scene':<15}" + "".join(f"{s:>10}" for s in SUBSETS))
    for scene in scenes:
        row = "".join(f"{sc.get((s, scene), 0):>10}" for s in SUBSETS)
        print(f"  {scene:<15}{row}")
    cond = summary.condition_counts()
    print("\nWeather conditions (images):")
    for c in ("clear", "fog", "snow", "other"):
        if c in cond:
            print(f"  {c:<8}{cond[c]:>8}")


def cmd_stats(cfg: dict) -> int:
    out = cfg.get("out")
    if not out:
        raise ConfigError("stats requires --out")
    summary = compute_stats(out)
    print(f"dataset {out}: {summary.total_images} images")
    _print_tables(summary)
    stats_path = Path(out) / "meta" / "stats.json"
    stats_path.parent.mkdir(parents=True, exist_ok=True)
    stats_path.write_text(json.dumps(summary.to_dict(), indent=1))
    print(f"\nmachine-readable stats written to {stats_path}")
    return EXIT_OK


def cmd_validate(cfg: dict) -> int:
    out = cfg.get("out")
    if not out:
        raise ConfigError("validate requires --out")
    root = Path(out)
    problems: list[str] = []

    images = sorted((root / "images").glob("*/*.png"))
    if not images:
        problems.append(f"no images found under {root / 'images'}")
    for img in images:
        m = _NAME_RE.match(img.stem)
        if m is None:
            problems.append(f"{img}: unparseable filename")
            continue
        subset = m.group("subset")
        lbl = root / "labels" / subset / (img.stem + ".txt")
        if not lbl.exists():
            problems.append(f"{lbl}: missing label file")
            continue
        try:
            records = parse_labels(lbl.read_text())
        except ValueError as exc:
            problems.append(f"{lbl}: {exc}")
            continue
        from PIL import Image
        with Image.open(img) as im:
            width, height = im.size
        for i, r in enumerate(records, 1):
            if subset == VFX and r.class_id == CLASS_BIRD:
                problems.append(f"{lbl}: line {i}: bird annotation in VFX subset")
            if max(r.w * width, r.h * height) < MIN_BOX_SIDE - 0.5:
                problems.append(f"{lbl}: line {i}: box below minimum extent")
            if (r.x_c - r.w / 2 < -1e-9 or r.x_c + r.w / 2 > 1 + 1e-9
                    or r.y_c - r.h / 2 < -1e-9 or r.y_c + r.h / 2 > 1 + 1e-9):
                problems.append(f"{lbl}: line {i}: box outside the image")

    manifest_path = root / "meta" / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        listed = {rec["name"] for rec in manifest["images"]}
        on_disk = {img.stem for img in images}
        for name in sorted(listed - on_disk):
            problems.append(f"{manifest_path}: listed image missing on disk: {name}")
        for name in sorted(on_disk - listed):
            problems.append(f"{manifest_path}: image on disk not in manifest: {name}")
    else:
        problems.append(f"{manifest_path}: missing manifest")

    if problems:
        for p in problems[:50]:
            print(f"FAIL {p}", file=sys.stderr)
        print(f"validation failed: {len(problems)} problem(s)", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"validation OK: {len(images)} images")
    return EXIT_OK


def cmd_preview(cfg: dict) -> int:
    out = cfg.get("out")
    if not out:
        raise ConfigError("preview requires --out")
    from PIL import Image, ImageDraw
    root = Path(out)
    count = int(cfg.get("preview_count", 8))
    images = sorted((root / "images").glob("*/*.png"))
    if not images:
        raise LayoutInvalid(f"no images under {root / 'images'}")
    step = max(1, len(images) // count)
    preview_dir = root / "preview"
    preview_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for img_path in images[::step][:count]:
        subset = img_path.parent.name
        lbl = root / "labels" / subset / (img_path.stem + ".txt")
        records = parse_labels(lbl.read_text()) if lbl.exists() else []
        with Image.open(img_path) as im:
            im = im.convert("RGB")
            draw = ImageDraw.Draw(im)
            w, h = im.size
            for r in records:
                x0 = (r.x_c - r.w / 2) * w
                x1 = (r.x_c + r.w / 2) * w
                y0 = (r.y_c - r.h / 2) * h
                y1 = (r.y_c + r.h / 2) * h
                color = (255, 60, 60) if r.class_id == 0 else (60, 160, 255)
                draw.rectangle([x0, y0, x1, y1], outline=color, width=2)
            im.save(preview_dir / img_path.name)
        written += 1
    print(f"wrote {written} preview frames to {preview_dir}")
    return EXIT_OK


def run(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "generate":
            return cmd_generate(cfg)
        if args.command == "stats":
            return cmd_stats(cfg)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "preview":
            return cmd_preview(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, LayoutInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AirsynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
