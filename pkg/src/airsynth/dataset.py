"""Dataset planning and end-to-end generation.

Planning scales a reference composition (subset x bucket x scene x weather
condition) down to any requested total with nested largest-remainder
rounding, so every marginal that is exact at the reference scale stays exact
and counts always sum to the requested total.

Generation derives every stochastic choice from (master_seed, frame_index),
so the output directory is a pure function of the plan regardless of worker
count or scheduling.
"""

from __future__ import annotations

import json
import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image

from .annotation import (AnnotationRecord, annotate_segmap, parse_labels,
                         serialize_labels, MIN_BOX_SIDE, MAX_AREA_FRACTION)
from .assets import build_asset_library, CLASS_BIRD, CLASS_DRONE
from .camera import Rig, build_rig
from .errors import (EmptyStratum, GenerationFailed, InvalidTargets,
                     LayoutInvalid, RejectionExhausted)
from .render import render_frame
from .rng import derive_seed, substream
from .scene import (BIRD_ONLY, BOTH, BUCKETS, CLEAR, CONDITIONS, DRONE_ONLY,
                    FOG, FOG_GRID, OTHER, PROFILE_IDS, PROFILES, SNOW,
                    SNOW_GRID, VFX_DRONE, WeatherParams, sample_scene)
from .weather import apply_weather

log = logging.getLogger(__name__)

LAYOUT_VERSION = 1
FRAME_ATTEMPTS = 25

NON_VFX, VFX, WEATHER = "non_vfx", "vfx", "weather"
SUBSETS = (NON_VFX, VFX, WEATHER)

# reference composition (image counts at the full reference scale)
REFERENCE_TOTAL = 178_639
SUBSET_TOTALS = {NON_VFX: 112_899, VFX: 46_086, WEATHER: 19_654}
NONVFX_BUCKETS = {DRONE_ONLY: 32_366, BIRD_ONLY: 48_097, BOTH: 32_436}
WEATHER_CELLS = {
    FOG: {DRONE_ONLY: 3_163, BIRD_ONLY: 1_926, BOTH: 5_121},
    SNOW: {DRONE_ONLY: 3_047, BIRD_ONLY: 865, BOTH: 2_830},
    OTHER: {DRONE_ONLY: 904, BIRD_ONLY: 148, BOTH: 1_650},
}
# scene availability differs per subset: bridge_water never hosts VFX frames
# and rural_terrain never hosts non-VFX frames
SCENES_NON_VFX = {
    "urban_towers": 5_353, "park": 21_361, "dynamic_city": 13_221,
    "city_blocks": 4_918, "downtown": 35_556, "bridge_water": 32_490,
}
SCENES_VFX = {
    "urban_towers": 3_331, "park": 3_364, "dynamic_city": 4_870,
    "city_blocks": 12_741, "downtown": 8_531, "rural_terrain": 13_249,
}

DEFAULT_VAL_FRACTION = 6_461 / 53_083  # reference train/val split ratio

_NAME_RE = re.compile(
    r"^(?P<scene>" + "|".join(PROFILE_IDS) + r")"
    r"_(?P<subset>non_vfx|vfx|weather)"
    r"_(?P<cond>clear|fog|snow|other)(?P<sev>\d{2})"
    r"_(?P<frame>\d{6})_cam(?P<cam>\d+)$"
)


def largest_remainder(weights: dict, total: int) -> dict:
    """Apportion `total` across keys proportionally to integer weights.

    Floors the exact quotas, then hands the leftover units to the largest
    fractional remainders (ties broken by insertion order).
    """
    if total < 0:
        raise ValueError("total must be nonnegative")
    wsum = sum(weights.values())
    if wsum <= 0:
        raise ValueError("weights must sum to a positive value")
    quotas = {k: Fraction(total) * Fraction(w, wsum) for k, w in weights.items()}
    counts = {k: int(q) for k, q in quotas.items()}
    leftover = total - sum(counts.values())
    order = sorted(weights, key=lambda k: (-(quotas[k] - counts[k]),
                                           list(weights).index(k)))
    for k in order[:leftover]:
        counts[k] += 1
    return counts


@dataclass(frozen=True)
class CompositionTarget:
    subset: str
    bucket: str
    scene: str
    condition: str
    count: int

    def __post_init__(self):
        if self.subset not in SUBSETS or self.bucket not in BUCKETS:
            raise InvalidTargets(f"bad subset/bucket in {self}")
        if (self.subset == VFX) != (self.bucket == VFX_DRONE):
            raise InvalidTargets(
                f"vfx subset and vfx_drone bucket must pair up: {self}")
        if self.scene not in PROFILE_IDS or self.condition not in CONDITIONS:
            raise InvalidTargets(f"bad scene/condition in {self}")
        if (self.subset == WEATHER) == (self.condition == CLEAR):
            raise InvalidTargets(
                f"weather subset needs a non-clear condition and vice versa: {self}")
        if self.count < 0:
            raise InvalidTargets(f"negative count in {self}")

    def to_dict(self) -> dict:
        return {"subset": self.subset, "bucket": self.bucket, "scene": self.scene,
                "condition": self.condition, "count": self.count}


@dataclass
class DatasetPlan:
    targets: list[CompositionTarget]
    width: int = 1920
    height: int = 1080
    camera_count: int = 6
    hfov: float = math.radians(60.0)
    rig_position: tuple[float, float, float] = (0.0, 0.0, 1.8)
    master_seed: int = 0
    write_masks: bool = True
    layout_version: int = LAYOUT_VERSION

    @property
    def total_images(self) -> int:
        return sum(t.count for t in self.targets)

    def build_rig(self) -> Rig:
        return build_rig(self.camera_count, self.hfov, self.width, self.height,
                         self.rig_position)

    def to_dict(self) -> dict:
        return {
            "layout_version": self.layout_version,
            "total_images": self.total_images,
            "width": self.width, "height": self.height,
            "camera_count": self.camera_count,
            "hfov_deg": math.degrees(self.hfov),
            "rig_position": list(self.rig_position),
            "master_seed": self.master_seed,
            "write_masks": self.write_masks,
            "targets": [t.to_dict() for t in self.targets],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetPlan":
        return cls(
            targets=[CompositionTarget(**t) for t in d["targets"]],
            width=d["width"], height=d["height"],
            camera_count=d["camera_count"],
            hfov=math.radians(d["hfov_deg"]),
            rig_position=tuple(d["rig_position"]),
            master_seed=d["master_seed"],
            write_masks=d["write_masks"],
            layout_version=d["layout_version"],
        )


def plan_dataset(total_images: int, profile: str = "simd3_proportions",
                 custom_targets: list[CompositionTarget] | None = None,
                 **plan_kwargs) -> DatasetPlan:
    """Build a composition plan summing exactly to total_images.

    Under simd3_proportions, the reference tables are scaled with nested
    largest-remainder rounding: subsets first, then buckets or conditions
    within each subset, then scenes within each cell.
    """
    if profile == "custom":
        if not custom_targets:
            raise InvalidTargets("custom profile requires custom_targets")
        if sum(t.count for t in custom_targets) != total_images:
            raise InvalidTargets("custom target counts must sum to total_images")
        return DatasetPlan(targets=list(custom_targets), **plan_kwargs)
    if profile != "simd3_proportions":
        raise InvalidTargets(f"unknown profile {profile!r}")
    if total_images < 10:
        raise InvalidTargets("total_images must be at least 10")

    targets: list[CompositionTarget] = []
    subset_counts = largest_remainder(SUBSET_TOTALS, total_images)

    bucket_counts = largest_remainder(NONVFX_BUCKETS, subset_counts[NON_VFX])
    for bucket, n in bucket_counts.items():
        for scene, k in largest_remainder(SCENES_NON_VFX, n).items():
            targets.append(CompositionTarget(NON_VFX, bucket, scene, CLEAR, k))

    for scene, k in largest_remainder(SCENES_VFX, subset_counts[VFX]).items():
        targets.append(CompositionTarget(VFX, VFX_DRONE, scene, CLEAR, k))

    cond_totals = {c: sum(row.values()) for c, row in WEATHER_CELLS.items()}
    cond_counts = largest_remainder(cond_totals, subset_counts[WEATHER])
    for cond, n in cond_counts.items():
        for bucket, m in largest_remainder(WEATHER_CELLS[cond], n).items():
            for scene, k in largest_remainder(SCENES_NON_VFX, m).items():
                targets.append(CompositionTarget(WEATHER, bucket, scene, cond, k))

    return DatasetPlan(targets=targets, **plan_kwargs)


# --- frame jobs ---------------------------------------------------------------


def _severity_for(condition: str, master_seed: int, frame_index: int):
    """Per-frame severity draw from the condition's grid."""
    if condition == CLEAR:
        return 0.0, 0.0
    rng = substream(master_seed, "severity", frame_index)
    if condition == FOG:
        return float(FOG_GRID[rng.integers(0, len(FOG_GRID))]), 0.0
    if condition == SNOW:
        return float(SNOW_GRID[rng.integers(0, len(SNOW_GRID))]), 0.0
    # "other": fog + snow composed at independent severities
    return (float(FOG_GRID[rng.integers(0, len(FOG_GRID))]),
            float(SNOW_GRID[rng.integers(0, len(SNOW_GRID))]))


def enumerate_jobs(plan: DatasetPlan, output_dir: str) -> list[dict]:
    jobs = []
    index = 0
    for t in plan.targets:
        for _ in range(t.count):
            sev, sev2 = _severity_for(t.condition, plan.master_seed, index)
            jobs.append({
                "frame_index": index,
                "subset": t.subset, "bucket": t.bucket, "scene": t.scene,
                "condition": t.condition, "severity": sev, "severity2": sev2,
                "cam": index % plan.camera_count,
                "plan": plan.to_dict(),
                "output_dir": output_dir,
            })
            index += 1
    return jobs


def frame_name(job: dict) -> str:
    sev_pct = int(round(job["severity"] * 100))
    return (f"{job['scene']}_{job['subset']}_{job['condition']}{sev_pct:02d}"
            f"_{job['frame_index']:06d}_cam{job['cam']}")


@lru_cache(maxsize=4)
def _cached_assets(master_seed: int):
    return build_asset_library(master_seed)


@lru_cache(maxsize=4)
def _cached_rig(camera_count, hfov, width, height, rig_position):
    return build_rig(camera_count, hfov, width, height, rig_position)


def _bucket_contract_ok(bucket: str, records: list[AnnotationRecord],
                        width: int, height: int) -> bool:
    has_drone = any(r.class_id == CLASS_DRONE for r in records)
    has_bird = any(r.class_id == CLASS_BIRD for r in records)
    # shipped frames must also be free of oversize boxes
    if any(r.w * r.h > MAX_AREA_FRACTION for r in records):
        return False
    if bucket == DRONE_ONLY or bucket == VFX_DRONE:
        return has_drone and not has_bird
    if bucket == BIRD_ONLY:
        return has_bird and not has_drone
    return has_drone and has_bird  # BOTH


def render_one_frame(job: dict):
    """Render, annotate, and weather one frame; returns (record, arrays).

    Retries with derived sub-seeds until the realized labels satisfy the
    bucket contract, so planned and realized composition always match.
    """
    plan = DatasetPlan.from_dict(job["plan"])
    rig = _cached_rig(plan.camera_count, plan.hfov, plan.width, plan.height,
                      plan.rig_position)
    library = _cached_assets(plan.master_seed)
    camera = rig.cameras[job["cam"]]
    env = PROFILES[job["scene"]]
    weather = WeatherParams(job["condition"], job["severity"], job["severity2"])

    for attempt in range(FRAME_ATTEMPTS):
        scene_seed = derive_seed(plan.master_seed, "scene",
                                 job["frame_index"], attempt)
        try:
            scn = sample_scene(job["bucket"], env, weather, library,
                               scene_seed, camera)
        except RejectionExhausted:
            continue
        frame = render_frame(scn, camera)
        class_of = {i.instance_id: i.asset.class_id
                    for i in scn.instances if i.annotatable}
        records = annotate_segmap(frame.segmap, class_of)
        if not _bucket_contract_ok(job["bucket"], records, plan.width, plan.height):
            continue
        weather_seed = derive_seed(plan.master_seed, "weather", job["frame_index"])
        out = apply_weather(frame, job["condition"], job["severity"],
                            weather_seed, job["severity2"])
        record = {
            "name": frame_name(job),
            "frame_index": job["frame_index"],
            "subset": job["subset"], "bucket": job["bucket"],
            "scene": job["scene"], "condition": job["condition"],
            "severity": job["severity"], "severity2": job["severity2"],
            "cam": job["cam"], "scene_seed": scene_seed, "attempt": attempt,
            "n_annotations": len(records),
            "flock_particles": scn.flock_particle_count(),
            "instances": [i.to_dict() for i in scn.instances],
        }
        return record, out, serialize_labels(records)
    raise GenerationFailed(
        f"frame {job['frame_index']} ({job['bucket']}/{job['scene']}) "
        f"failed after {FRAME_ATTEMPTS} attempts")


def _write_frame(job: dict, record: dict, bundle, labels: str) -> dict:
    root = Path(job["output_dir"])
    name = record["name"]
    subset = record["subset"]
    img_path = root / "images" / subset / f"{name}.png"
    img_path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(bundle.rgb).save(img_path)
    lbl_path = root / "labels" / subset / f"{name}.txt"
    lbl_path.parent.mkdir(parents=True, exist_ok=True)
    lbl_path.write_text(labels)
    if job["plan"]["write_masks"]:
        mask_path = root / "masks" / subset / f"{name}.png"
        mask_path.parent.mkdir(parents=True, exist_ok=True)
        seg16 = bundle.segmap.astype(np.uint16)
        Image.fromarray(seg16).save(mask_path)
    return record


def _run_job(job: dict) -> dict:
    record, bundle, labels = render_one_frame(job)
    return _write_frame(job, record, bundle, labels)


@dataclass
class DatasetSummary:
    counts: dict = field(default_factory=dict)  # (subset,bucket,scene,cond) -> n
    class_instances: dict = field(default_factory=dict)  # class id -> count
    box_hist: dict = field(default_factory=dict)  # max-side bin -> count
    wall_time: float = 0.0
    total_images: int = 0

    def subset_bucket_counts(self) -> dict:
        out: dict = {}
        for (subset, bucket, _, _), n in self.counts.items():
            key = (subset, bucket)
            out[key] = out.get(key, 0) + n
        return out

    def condition_counts(self) -> dict:
        out: dict = {}
        for (_, _, _, cond), n in self.counts.items():
            out[cond] = out.get(cond, 0) + n
        return out

    def scene_counts(self) -> dict:
        out: dict = {}
        for (subset, _, scene, _), n in self.counts.items():
            key = (subset, scene)
            out[key] = out.get(key, 0) + n
        return out

    def to_dict(self) -> dict:
        # wall_time stays off disk so output directories are byte-reproducible
        return {
            "total_images": self.total_images,
            "counts": [{"subset": s, "bucket": b, "scene": sc, "condition": c,
                        "count": n}
                       for (s, b, sc, c), n in sorted(self.counts.items())],
            "class_instances": {str(k): v for k, v in
                                sorted(self.class_instances.items())},
            "box_max_side_hist": {str(k): v for k, v in
                                  sorted(self.box_hist.items())},
        }


_HIST_BINS = (8, 16, 32, 64, 128, 256, 512, 1024, 100000)


def _hist_bin(side: float) -> int:
    for b in _HIST_BINS:
        if side <= b:
            return b
    return _HIST_BINS[-1]


def generate_dataset(plan: DatasetPlan, output_dir, workers: int = 1) -> DatasetSummary:
    """Execute the plan into output_dir; byte-identical for any worker count."""
    start = time.time()
    output_dir = str(output_dir)
    jobs = enumerate_jobs(plan, output_dir)
    Path(output_dir, "meta").mkdir(parents=True, exist_ok=True)

    if workers <= 1:
        records = [_run_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_job, jobs, chunksize=4))
    records.sort(key=lambda r: r["frame_index"])

    summary = DatasetSummary(total_images=len(records))
    for rec in records:
        key = (rec["subset"], rec["bucket"], rec["scene"], rec["condition"])
        summary.counts[key] = summary.counts.get(key, 0) + 1
    # per-class instance counts and box histogram from the label files
    for rec in records:
        lbl = Path(output_dir, "labels", rec["subset"], rec["name"] + ".txt")
        for r in parse_labels(lbl.read_text()):
            summary.class_instances[r.class_id] = (
                summary.class_instances.get(r.class_id, 0) + 1)
            side = max(r.w * plan.width, r.h * plan.height)
            b = _hist_bin(side)
            summary.box_hist[b] = summary.box_hist.get(b, 0) + 1
    summary.wall_time = time.time() - start
    log.info("generated %d images in %.1fs", len(records), summary.wall_time)

    manifest = {
        "plan": plan.to_dict(),
        "rig": plan.build_rig().to_dict(),
        "images": records,
    }
    Path(output_dir, "meta", "manifest.json").write_text(
        json.dumps(manifest, indent=1))
    Path(output_dir, "meta", "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=1))
    return summary


# --- stats from disk ----------------------------------------------------------


def _classify_bucket(subset: str, records: list[AnnotationRecord]) -> str:
    if subset == VFX:
        return VFX_DRONE
    has_drone = any(r.class_id == CLASS_DRONE for r in records)
    has_bird = any(r.class_id == CLASS_BIRD for r in records)
    if has_drone and has_bird:
        return BOTH
    if has_drone:
        return DRONE_ONLY
    if has_bird:
        return BIRD_ONLY
    raise LayoutInvalid("label file with no annotations")


def compute_stats(dataset_dir) -> DatasetSummary:
    """Recompute composition purely from the on-disk files."""
    root = Path(dataset_dir)
    images = sorted((root / "images").glob("*/*.png"))
    if not images:
        raise LayoutInvalid(f"no images under {root / 'images'}")
    summary = DatasetSummary(total_images=len(images))
    for img_path in images:
        m = _NAME_RE.match(img_path.stem)
        if m is None:
            raise LayoutInvalid(f"unparseable image name: {img_path.name}")
        subset = m.group("subset")
        lbl_path = root / "labels" / subset / (img_path.stem + ".txt")
        if not lbl_path.exists():
            raise LayoutInvalid(f"missing label file: {lbl_path}")
        try:
            records = parse_labels(lbl_path.read_text())
        except ValueError as exc:
            raise LayoutInvalid(f"{lbl_path}: {exc}") from exc
        with Image.open(img_path) as im:
            width, height = im.size
        try:
            bucket = _classify_bucket(subset, records)
        except LayoutInvalid as exc:
            raise LayoutInvalid(f"{lbl_path}: {exc}") from exc
        key = (subset, bucket, m.group("scene"), m.group("cond"))
        summary.counts[key] = summary.counts.get(key, 0) + 1
        for r in records:
            summary.class_instances[r.class_id] = (
                summary.class_instances.get(r.class_id, 0) + 1)
            side = max(r.w * width, r.h * height)
            summary.box_hist[_hist_bin(side)] = (
                summary.box_hist.get(_hist_bin(side), 0) + 1)
    return summary


def split_dataset(dataset_dir, val_fraction: float = DEFAULT_VAL_FRACTION,
                  seed: int = 0) -> tuple[Path, Path]:
    """Deterministic stratified train/val split into listing files.

    Strata are (subset, bucket); the validation quota is apportioned across
    strata with largest-remainder rounding on stratum sizes.
    """
    if not (0.0 < val_fraction < 1.0):
        raise ValueError("val_fraction must lie in (0, 1)")
    root = Path(dataset_dir)
    strata: dict[tuple, list[str]] = {}
    for img_path in sorted((root / "images").glob("*/*.png")):
        m = _NAME_RE.match(img_path.stem)
        if m is None:
            raise LayoutInvalid(f"unparseable image name: {img_path.name}")
        subset = m.group("subset")
        lbl_path = root / "labels" / subset / (img_path.stem + ".txt")
        records = parse_labels(lbl_path.read_text())
        bucket = _classify_bucket(subset, records)
        strata.setdefault((subset, bucket), []).append(
            str(img_path.relative_to(root)))

    if not strata:
        raise LayoutInvalid(f"no images under {root / 'images'}")
    for key, items in strata.items():
        if len(items) < 2:
            raise EmptyStratum(f"stratum {key} has only {len(items)} image(s)")

    total = sum(len(v) for v in strata.values())
    val_total = int(round(val_fraction * total))
    quotas = largest_remainder({k: len(v) for k, v in strata.items()}, val_total)

    train, val = [], []
    for key in sorted(strata):
        items = sorted(strata[key])
        rng = substream(seed, "split", key[0], key[1])
        perm = rng.permutation(len(items))
        k = min(quotas[key], len(items) - 1)  # keep at least one train image
        chosen = {items[i] for i in perm[:k]}
        val.extend(sorted(chosen))
        train.extend(sorted(set(items) - chosen))

    train_path = root / "train.txt"
    val_path = root / "val.txt"
    train_path.write_text("".join(p + "\n" for p in sorted(train)))
    val_path.write_text("".join(p + "\n" for p in sorted(val)))
    return train_path, val_path
