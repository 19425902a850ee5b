"""End-to-end acceptance checks, one per shipped guarantee.

Each test emits a single PASS/FAIL line; the lines are echoed together after
the run (see conftest). Heavy dataset generation happens once per session at
the reduced 640x360 desk resolution; the throughput check runs at full
1920x1080.
"""

import json
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import conftest
from airsynth.annotation import (PixelBox, connected_components, denormalize,
                                 filter_instances, parse_labels,
                                 serialize_labels, tight_box, to_yolo)
from airsynth.camera import build_rig, project, unproject
from airsynth.dataset import (CompositionTarget, generate_dataset,
                              plan_dataset)
from airsynth.render import render_frame
from airsynth.scene import (FOG_GRID, PROFILES, SNOW_GRID, WeatherParams,
                            sample_scene)
from airsynth.weather import apply_fog, apply_snow, streak_pixel_mask, FOG_COLOR

from conftest import bfs_components

W, H = 640, 360


def report(idx: int, name: str, ok: bool, detail: str = "", soft: bool = False):
    verdict = "PASS" if ok else "FAIL"
    line = f"{verdict} criterion {idx:02d} {name}"
    if detail:
        line += f": {detail}"
    if soft:
        line += " [soft gate]"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    if not soft:
        assert ok, line


@pytest.fixture(scope="module")
def dataset_1000(tmp_path_factory):
    out = tmp_path_factory.mktemp("accept") / "ds1000"
    plan = plan_dataset(1000, width=W, height=H, master_seed=1)
    generate_dataset(plan, out, workers=4)
    return out


def test_criterion_01_composition_reproduction():
    plan = plan_dataset(178_639)
    subset: dict = {}
    nonvfx: dict = {}
    weather_bucket: dict = {}
    cond: dict = {}
    for t in plan.targets:
        subset[t.subset] = subset.get(t.subset, 0) + t.count
        if t.subset == "non_vfx":
            nonvfx[t.bucket] = nonvfx.get(t.bucket, 0) + t.count
        if t.subset == "weather":
            weather_bucket[t.bucket] = weather_bucket.get(t.bucket, 0) + t.count
            cond[t.condition] = cond.get(t.condition, 0) + t.count
    ok = (plan.total_images == 178_639
          and subset == {"non_vfx": 112_899, "vfx": 46_086, "weather": 19_654}
          and nonvfx == {"drone_only": 32_366, "bird_only": 48_097, "both": 32_436}
          and weather_bucket == {"drone_only": 7_114, "bird_only": 2_939,
                                 "both": 9_601}
          and cond == {"fog": 10_210, "snow": 6_742, "other": 2_702})
    report(1, "composition reproduction at reference scale", ok,
           f"subsets={subset}, conditions={cond}")


def test_criterion_02_scaled_composition():
    plan = plan_dataset(1000)
    got: dict = {}
    for t in plan.targets:
        got[t.subset] = got.get(t.subset, 0) + t.count

    # independent rounding implementation: float quotas, floor, residual order
    ref = {"non_vfx": 112_899, "vfx": 46_086, "weather": 19_654}
    wsum = sum(ref.values())
    floors = {k: math.floor(1000 * v / wsum) for k, v in ref.items()}
    rem = sorted(ref, key=lambda k: 1000 * ref[k] / wsum - floors[k], reverse=True)
    for k in rem[:1000 - sum(floors.values())]:
        floors[k] += 1
    ok = got == floors and sum(got.values()) == 1000
    report(2, "scaled composition at total=1000", ok, f"{got}")


def test_criterion_03_vfx_bird_freedom(tmp_path):
    targets = [CompositionTarget("vfx", "vfx_drone", s, "clear", 10)
               for s in ("urban_towers", "park", "dynamic_city",
                         "city_blocks", "downtown", "rural_terrain")]
    plan = plan_dataset(60, profile="custom", custom_targets=targets,
                        width=W, height=H, master_seed=2)
    out = tmp_path / "vfx"
    generate_dataset(plan, out, workers=4)
    labels = sorted((out / "labels" / "vfx").glob("*.txt"))
    bird_lines = sum(1 for p in labels for line in p.read_text().splitlines()
                     if line.startswith("1 "))
    manifest = json.loads((out / "meta" / "manifest.json").read_text())
    flocky = sum(1 for r in manifest["images"] if r["flock_particles"] >= 10)
    frac = flocky / len(manifest["images"])
    ok = len(labels) == 60 and bird_lines == 0 and frac >= 0.30
    report(3, "VFX subset bird-freedom with flock clutter", ok,
           f"bird lines={bird_lines}, frames with >=10 particles={frac:.0%}")


def test_criterion_04_yolo_conversion():
    rng = np.random.default_rng(4)
    width, height = 1920, 1080
    worst_rel = 0.0
    worst_px = 0
    for _ in range(10_000):
        x0 = int(rng.integers(0, width - 1))
        x1 = int(rng.integers(x0 + 1, width + 1))
        y0 = int(rng.integers(0, height - 1))
        y1 = int(rng.integers(y0 + 1, height + 1))
        rec = to_yolo(PixelBox(x0, y0, x1, y1), 0, width, height)
        # independent evaluator of the normalized center/size equations
        exp = ((x0 + x1) / (2 * width), (y0 + y1) / (2 * height),
               (x1 - x0) / width, (y1 - y0) / height)
        for got, want in zip((rec.x_c, rec.y_c, rec.w, rec.h), exp):
            worst_rel = max(worst_rel, abs(got - want) / want)
        back = denormalize(parse_labels(serialize_labels([rec]))[0],
                           width, height)
        worst_px = max(worst_px, abs(back.x_min - x0), abs(back.x_max - x1),
                       abs(back.y_min - y0), abs(back.y_max - y1))
    ok = worst_rel <= 1e-12 and worst_px <= 1
    report(4, "box normalization equations", ok,
           f"max rel err={worst_rel:.2e}, max round-trip err={worst_px}px")


def test_criterion_05_ccl_oracle():
    rng = np.random.default_rng(5)
    mismatches = 0
    for _ in range(1000):
        seg = np.zeros((64, 64), dtype=np.int32)
        for blob_id in range(1, int(rng.integers(2, 7))):
            n = int(rng.integers(5, 80))
            ys = rng.integers(0, 64, size=n)
            xs = rng.integers(0, 64, size=n)
            seg[ys, xs] = blob_id
        class_of = {int(i): 0 for i in np.unique(seg) if i != 0}
        got = {frozenset(map(tuple, m.pixels.tolist()))
               for m in connected_components(seg, class_of)}
        if got != set(bfs_components(seg)):
            mismatches += 1
    report(5, "connected components vs flood-fill oracle", mismatches == 0,
           f"{mismatches} mismatching grids of 1000")


def test_criterion_06_box_tightness(dataset_1000):
    from PIL import Image
    manifest = json.loads((dataset_1000 / "meta" / "manifest.json").read_text())
    records = sorted(manifest["images"], key=lambda r: r["frame_index"])[:500]
    bad = 0
    for rec in records:
        name, subset = rec["name"], rec["subset"]
        seg = np.asarray(Image.open(
            dataset_1000 / "masks" / subset / f"{name}.png")).astype(np.int32)
        class_of = {i["instance_id"]: i["class_id"]
                    for i in rec["instances"] if i["annotatable"]}
        masks = filter_instances(connected_components(seg, class_of), W, H)
        label_boxes = sorted(
            (b.x_min, b.y_min, b.x_max, b.y_max) for b in
            (denormalize(r, W, H) for r in
             parse_labels((dataset_1000 / "labels" / subset /
                           f"{name}.txt").read_text())))
        recomputed = []
        for m in masks:
            box = tight_box(m)
            ys, xs = m.pixels[:, 0], m.pixels[:, 1]
            # every edge touches a pixel, no pixel escapes the box
            edges_touch = ((xs == box.x_min).any() and (xs == box.x_max - 1).any()
                           and (ys == box.y_min).any() and (ys == box.y_max - 1).any())
            inside = ((xs >= box.x_min).all() and (xs < box.x_max).all()
                      and (ys >= box.y_min).all() and (ys < box.y_max).all())
            if not (edges_touch and inside):
                bad += 1
            recomputed.append((box.x_min, box.y_min, box.x_max, box.y_max))
        if sorted(recomputed) != label_boxes:
            bad += 1
    report(6, "box tightness over 500 frames", bad == 0, f"{bad} violations")


def test_criterion_07_size_band(dataset_1000):
    n_boxes = 0
    violations = 0
    for lbl in (dataset_1000 / "labels").glob("*/*.txt"):
        for r in parse_labels(lbl.read_text()):
            n_boxes += 1
            max_side = max(r.w * W, r.h * H)
            if max_side < 5 - 0.01 or r.w * r.h > 0.20 + 1e-6:
                violations += 1
    ok = violations == 0 and n_boxes > 0
    report(7, "size band over a 1000-image dataset", ok,
           f"{n_boxes} boxes, {violations} out of band")


def test_criterion_08_rig_geometry():
    rig = build_rig(6, math.radians(60.0), 1920, 1080)
    az_ok = all(
        abs(c.extrinsics.azimuth - i * math.pi / 3) < 1e-15
        for i, c in enumerate(rig.cameras))
    focal = rig.cameras[0].intrinsics.focal_px
    focal_ok = abs(focal - 1662.768) <= 1e-3

    boundary_ok = True
    worst = 0.0
    for i in range(6):
        a, b = rig.cameras[i], rig.cameras[(i + 1) % 6]
        # a point on the shared frustum boundary, clockwise-from-+x azimuth
        theta = a.extrinsics.azimuth + math.pi / 6
        for d in (10.0, 80.0):
            px, py, pz = a.extrinsics.rig_position
            pt = (px + d * math.cos(theta), py - d * math.sin(theta), pz)
            ua, _ = project(a, pt)
            ub, _ = project(b, pt)
            worst = max(worst, abs(ua - 1920.0), abs(ub - 0.0))
    boundary_ok = worst <= 1e-6
    ok = az_ok and focal_ok and boundary_ok
    report(8, "rig geometry", ok,
           f"focal={focal:.3f}, boundary err={worst:.2e}px")


def test_criterion_09_weather_invariance(library):
    rig = build_rig(6, math.radians(60.0), W, H)
    fogc = np.array(FOG_COLOR, dtype=np.float64)
    seg_ok = fog_ok = snow_ok = True
    for k in range(20):
        cam = rig.cameras[k % 6]
        scn = sample_scene("both", PROFILES["park"], WeatherParams(),
                           library, 900 + k, cam)
        frame = render_frame(scn, cam)
        prev = None
        for sev in (0.0,) + tuple(FOG_GRID):
            out = apply_fog(frame, sev)
            seg_ok &= np.array_equal(out.segmap, frame.segmap)
            dist = float(np.abs(out.rgb.astype(np.float64) - fogc).mean())
            if prev is not None and dist > prev + 1e-9:
                fog_ok = False
            prev = dist
        prev_count = -1
        for sev in SNOW_GRID:
            out = apply_snow(frame, sev, seed=k)
            seg_ok &= np.array_equal(out.segmap, frame.segmap)
            count = int(streak_pixel_mask(frame.segmap.shape, sev, seed=k).sum())
            if count < prev_count:
                snow_ok = False
            prev_count = count
    ok = seg_ok and fog_ok and snow_ok
    report(9, "weather label invariance and monotonicity", ok,
           f"segmap unchanged={seg_ok}, fog monotone={fog_ok}, "
           f"snow monotone={snow_ok}")


def test_criterion_10_paired_weather_labels(tmp_path):
    kw = dict(width=W, height=H, master_seed=10)
    clear = plan_dataset(50, profile="custom", custom_targets=[
        CompositionTarget("non_vfx", "both", "park", "clear", 50)], **kw)
    fog = plan_dataset(50, profile="custom", custom_targets=[
        CompositionTarget("weather", "both", "park", "fog", 50)], **kw)
    out_a, out_b = tmp_path / "clear", tmp_path / "fog"
    generate_dataset(clear, out_a, workers=4)
    generate_dataset(fog, out_b, workers=4)

    def by_frame(root):
        return sorted(root.glob("labels/*/*.txt"),
                      key=lambda p: p.stem.split("_cam")[0][-6:])

    la, lb = by_frame(out_a), by_frame(out_b)
    diffs = sum(1 for a, b in zip(la, lb) if a.read_text() != b.read_text())
    ok = len(la) == len(lb) == 50 and diffs == 0
    report(10, "paired clear/fog label consistency", ok,
           f"{diffs} differing pairs of 50")


def test_criterion_11_parallel_determinism(tmp_path):
    import hashlib
    plan = plan_dataset(200, width=W, height=H, master_seed=11)
    digests = []
    for workers in (1, 4, 8):
        out = tmp_path / f"w{workers}"
        generate_dataset(plan, out, workers=workers)
        h = hashlib.sha256()
        for p in sorted(q for q in out.rglob("*") if q.is_file()):
            h.update(str(p.relative_to(out)).encode())
            h.update(p.read_bytes())
        digests.append(h.hexdigest())
    ok = len(set(digests)) == 1
    report(11, "determinism under parallelism", ok,
           f"digests {'all equal' if ok else digests}")


def test_criterion_12_throughput(tmp_path):
    plan = plan_dataset(24, width=1920, height=1080, master_seed=12,
                        write_masks=False)
    t0 = time.perf_counter()
    generate_dataset(plan, tmp_path / "w4", workers=4)
    fps4 = 24 / (time.perf_counter() - t0)
    t0 = time.perf_counter()
    generate_dataset(plan, tmp_path / "w1", workers=1)
    fps1 = 24 / (time.perf_counter() - t0)
    scaling = (fps4 / fps1) / 4
    ok = fps4 >= 2.0 and scaling >= 0.7
    import os
    report(12, "throughput at 1920x1080", ok,
           f"{fps4:.1f} fps on 4 workers, scaling {scaling:.2f}x linear "
           f"({os.cpu_count()} cpu(s) available)",
           soft=True)
