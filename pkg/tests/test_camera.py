import math

import numpy as np
import pytest

from airsynth.camera import (BEHIND_CAMERA, build_rig, project, unproject,
                             focal_from_hfov)
from airsynth.errors import InvalidFov


def test_six_camera_azimuths(rig_1080p):
    azimuths = [c.extrinsics.azimuth for c in rig_1080p.cameras]
    assert azimuths == [i * 2 * math.pi / 6 for i in range(6)]
    assert math.degrees(azimuths[3]) == pytest.approx(180.0, abs=1e-12)


def test_focal_length_60_deg(rig_1080p):
    # (W/2) / tan(hfov/2), evaluated independently
    expected = 960.0 / math.tan(math.radians(30.0))
    assert rig_1080p.cameras[0].intrinsics.focal_px == pytest.approx(expected, abs=1e-9)
    assert rig_1080p.cameras[0].intrinsics.focal_px == pytest.approx(1662.768, abs=1e-3)


def test_identical_intrinsics_across_rig(rig_1080p):
    intr = {c.intrinsics for c in rig_1080p.cameras}
    assert len(intr) == 1


def test_invalid_fov():
    with pytest.raises(InvalidFov):
        build_rig(1, math.radians(200.0), 1920, 1080)
    with pytest.raises(InvalidFov):
        build_rig(6, 0.0, 1920, 1080)


def test_optical_axis_hits_principal_point(rig_1080p):
    cam = rig_1080p.cameras[0]
    # cam0 looks along +x from the rig position
    px, py, pz = cam.extrinsics.rig_position
    uv = project(cam, (px + 10.0, py, pz))
    assert uv == pytest.approx((960.0, 540.0), abs=1e-9)


def test_offset_point_pinhole_formula(rig_1080p):
    cam = rig_1080p.cameras[0]
    f = cam.intrinsics.focal_px
    # 1 m along camera +x (world -y for cam0) at 10 m forward
    px, py, pz = cam.extrinsics.rig_position
    u, v = project(cam, (px + 10.0, py - 1.0, pz))
    assert u == pytest.approx(960.0 + f * (1.0 / 10.0), abs=1e-9)
    assert v == pytest.approx(540.0, abs=1e-9)


def test_behind_camera(rig_1080p):
    cam = rig_1080p.cameras[0]
    px, py, pz = cam.extrinsics.rig_position
    assert project(cam, (px - 1.0, py, pz)) is BEHIND_CAMERA


def test_adjacent_camera_boundary_consistency(rig_1080p):
    # a point on the shared angular boundary projects to u = W in camera i
    # and u = 0 in camera i+1
    for i in range(6):
        cam_a = rig_1080p.cameras[i]
        cam_b = rig_1080p.cameras[(i + 1) % 6]
        boundary = cam_a.extrinsics.azimuth + math.radians(30.0)
        px, py, pz = cam_a.extrinsics.rig_position
        d = 50.0
        point = (px + d * math.cos(boundary), py - d * math.sin(boundary), pz + 3.0)
        ua, _ = project(cam_a, point)
        ub, _ = project(cam_b, point)
        assert ua == pytest.approx(1920.0, abs=1e-6)
        assert ub == pytest.approx(0.0, abs=1e-6)


def test_project_unproject_identity(rig_1080p):
    rng = np.random.default_rng(5)
    for cam in rig_1080p.cameras:
        for _ in range(50):
            u = rng.uniform(0, 1920)
            v = rng.uniform(0, 1080)
            d = rng.uniform(0.05, 500.0)
            world = unproject(cam, u, v, d)
            uu, vv = project(cam, world)
            assert abs(uu - u) < 1e-9 and abs(vv - v) < 1e-9


def test_full_panoramic_coverage(rig_1080p):
    # every azimuth direction lands strictly inside exactly one camera,
    # boundaries shared pairwise
    for az_deg in range(0, 360, 7):
        az = math.radians(az_deg + 0.5)
        hits = 0
        for cam in rig_1080p.cameras:
            rel = (az - cam.extrinsics.azimuth + math.pi) % (2 * math.pi) - math.pi
            if abs(rel) < math.radians(30.0):
                hits += 1
        assert hits == 1
