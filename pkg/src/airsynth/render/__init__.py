"""Deterministic software renderer: co-registered RGB / instance-id segmap /
depth for one camera view of one scene instant.

The per-pixel fill loop is the hot path; a compiled Cython kernel is used
when available and a semantically identical NumPy kernel otherwise. Set
AIRSYNTH_KERNEL=py to force the fallback (used by the benchmark).
"""

from __future__ import annotations

import os

import numpy as np

from ..assets import AssetModel
from ..camera import CameraView, FAR_DEPTH, NEAR_PLANE
from ..scene import EnvironmentProfile, Scene, pose_transform
from ..rng import substream

if os.environ.get("AIRSYNTH_KERNEL") == "py":
    from .raster_py import fill_triangles
    KERNEL = "numpy"
else:
    try:
        from ._raster import fill_triangles
        KERNEL = "cython"
    except ImportError:
        from .raster_py import fill_triangles
        KERNEL = "numpy"


class FrameBundle:
    """RGB + instance-id segmap + depth, all height x width and pixel-consistent."""

    __slots__ = ("rgb", "segmap", "depth")

    def __init__(self, rgb: np.ndarray, segmap: np.ndarray, depth: np.ndarray):
        assert rgb.shape[:2] == segmap.shape == depth.shape
        self.rgb = rgb
        self.segmap = segmap
        self.depth = depth

    @classmethod
    def blank(cls, width: int, height: int) -> "FrameBundle":
        return cls(
            rgb=np.zeros((height, width, 3), dtype=np.uint8),
            segmap=np.zeros((height, width), dtype=np.int32),
            depth=np.full((height, width), FAR_DEPTH, dtype=np.float64),
        )

    def copy(self) -> "FrameBundle":
        return FrameBundle(self.rgb.copy(), self.segmap.copy(), self.depth.copy())


def _clip_near(tri_cam: np.ndarray, near: float) -> list[np.ndarray]:
    """Clip one camera-space triangle against z = near; 0-2 triangles out."""
    inside = tri_cam[:, 2] > near
    n_in = int(inside.sum())
    if n_in == 3:
        return [tri_cam]
    if n_in == 0:
        return []
    poly = []
    for i in range(3):
        a, b = tri_cam[i], tri_cam[(i + 1) % 3]
        ain, bin_ = a[2] > near, b[2] > near
        if ain:
            poly.append(a)
        if ain != bin_:
            t = (near - a[2]) / (b[2] - a[2])
            poly.append(a + t * (b - a))
    if len(poly) < 3:
        return []
    out = [np.array([poly[0], poly[i], poly[i + 1]]) for i in range(1, len(poly) - 1)]
    return out


def _rasterize_mesh(tris_world: np.ndarray, colors: np.ndarray, ids: np.ndarray,
                    camera: CameraView, frame: FrameBundle) -> None:
    """Project, near-clip, and fill a batch of world-space triangles.

    colors: (T, 3) uint8 flat per-triangle colors; ids: (T,) int32.
    """
    if tris_world.shape[0] == 0:
        return
    pos = np.asarray(camera.extrinsics.rig_position)
    rot = camera.rotation()
    cam = (tris_world - pos) @ rot.T  # (T, 3, 3)

    z = cam[:, :, 2]
    all_in = (z > NEAR_PLANE).all(axis=1)
    any_in = (z > NEAR_PLANE).any(axis=1)

    out_pts, out_invz, out_cols, out_ids = [], [], [], []

    def _append(cam_tris, cols, tids):
        intr = camera.intrinsics
        zz = cam_tris[:, :, 2]
        pts = np.empty(cam_tris.shape[:2] + (2,), dtype=np.float64)
        pts[:, :, 0] = intr.cx + intr.focal_px * cam_tris[:, :, 0] / zz
        pts[:, :, 1] = intr.cy + intr.focal_px * cam_tris[:, :, 1] / zz
        out_pts.append(pts)
        out_invz.append(1.0 / zz)
        out_cols.append(cols)
        out_ids.append(tids)

    if all_in.any():
        _append(cam[all_in], colors[all_in], ids[all_in])

    partial = any_in & ~all_in
    for idx in np.nonzero(partial)[0]:
        for clipped in _clip_near(cam[idx], NEAR_PLANE):
            _append(clipped[None, :, :], colors[idx:idx + 1], ids[idx:idx + 1])

    if not out_pts:
        return
    pts = np.ascontiguousarray(np.concatenate(out_pts))
    invz = np.ascontiguousarray(np.concatenate(out_invz))
    cols = np.ascontiguousarray(np.concatenate(out_cols).astype(np.uint8))
    tids = np.ascontiguousarray(np.concatenate(out_ids).astype(np.int32))

    # cull triangles whose screen bbox misses the image entirely
    intr = camera.intrinsics
    u0 = pts[:, :, 0].min(axis=1)
    u1 = pts[:, :, 0].max(axis=1)
    v0 = pts[:, :, 1].min(axis=1)
    v1 = pts[:, :, 1].max(axis=1)
    keep = (u1 > 0) & (u0 < intr.width) & (v1 > 0) & (v0 < intr.height)
    if not keep.all():
        pts, invz = np.ascontiguousarray(pts[keep]), np.ascontiguousarray(invz[keep])
        cols, tids = np.ascontiguousarray(cols[keep]), np.ascontiguousarray(tids[keep])
    if pts.shape[0] == 0:
        return
    fill_triangles(pts, invz, cols, tids, frame.rgb, frame.depth, frame.segmap)


def _shade(tris_world: np.ndarray, base_color, env: EnvironmentProfile) -> np.ndarray:
    """Flat Lambert shading: ambient floor + single directional sun."""
    e1 = tris_world[:, 1] - tris_world[:, 0]
    e2 = tris_world[:, 2] - tris_world[:, 0]
    n = np.cross(e1, e2)
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    n = n / norm
    sa, se = env.sun_azimuth, env.sun_elevation
    sun = np.array([np.cos(se) * np.cos(sa), np.cos(se) * np.sin(sa), np.sin(se)])
    lam = np.abs(n @ sun)  # double-sided: meshes are unoriented primitive soups
    k = env.ambient_level + (1.0 - env.ambient_level) * lam
    rgb = np.asarray(base_color, dtype=np.float64)[None, :] * k[:, None]
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


# --- procedural background ---------------------------------------------------

TERRAIN_RADIUS = 500.0
TERRAIN_CELLS = 40
STRUCT_RANGE = (25.0, 450.0)


def _value_noise(xs: np.ndarray, ys: np.ndarray, freq: float, seed: int) -> np.ndarray:
    """Two-octave lattice value noise in [0, 1], bilinear interpolation."""
    total = np.zeros_like(xs)
    amp_sum = 0.0
    for octave, amp in ((0, 1.0), (1, 0.4)):
        f = freq * (2.0 ** octave)
        gx, gy = xs * f, ys * f
        ix, iy = np.floor(gx).astype(np.int64), np.floor(gy).astype(np.int64)
        fx, fy = gx - ix, gy - iy
        sx = fx * fx * (3 - 2 * fx)
        sy = fy * fy * (3 - 2 * fy)

        def lattice(i, j):
            i = i.astype(np.uint64)
            j = j.astype(np.uint64)
            s = np.uint64((seed + octave) & 0xFFFFFFFFFFFFFFFF)
            h = (i * np.uint64(73856093)) ^ (j * np.uint64(19349663)) ^ (s * np.uint64(83492791))
            h = (h ^ (h >> np.uint64(13))) * np.uint64(1274126177)
            return ((h ^ (h >> np.uint64(16))) & np.uint64(0xFFFFFFFF)) / float(0xFFFFFFFF)

        v00, v10 = lattice(ix, iy), lattice(ix + 1, iy)
        v01, v11 = lattice(ix, iy + 1), lattice(ix + 1, iy + 1)
        total += amp * ((v00 * (1 - sx) + v10 * sx) * (1 - sy)
                        + (v01 * (1 - sx) + v11 * sx) * sy)
        amp_sum += amp
    return total / amp_sum


def _terrain_triangles(env: EnvironmentProfile, seed: int):
    n = TERRAIN_CELLS
    coords = np.linspace(-TERRAIN_RADIUS, TERRAIN_RADIUS, n + 1)
    gx, gy = np.meshgrid(coords, coords)
    gz = env.terrain_amplitude * _value_noise(gx, gy, env.terrain_frequency,
                                              seed & 0x7FFFFFFF)
    # flatten a clearing around the rig so the cameras never sit inside a
    # hill and nearby terrain stays below the horizon rows
    gz *= np.clip((np.hypot(gx, gy) - 15.0) / 35.0, 0.0, 1.0)
    verts = np.stack([gx, gy, gz], axis=-1)
    a = verts[:-1, :-1].reshape(-1, 3)
    b = verts[:-1, 1:].reshape(-1, 3)
    c = verts[1:, 1:].reshape(-1, 3)
    d = verts[1:, :-1].reshape(-1, 3)
    tris = np.concatenate([np.stack([a, b, c], axis=1),
                           np.stack([a, c, d], axis=1)])
    # per-triangle brightness variation keyed on centroid noise
    cent = tris.mean(axis=1)
    tone = 0.75 + 0.5 * _value_noise(cent[:, 0], cent[:, 1],
                                     env.terrain_frequency * 3.0,
                                     (seed + 7) & 0x7FFFFFFF)
    base = np.asarray(env.terrain_color, dtype=np.float64)
    colors = np.clip(np.rint(base[None, :] * tone[:, None]), 0, 255).astype(np.uint8)
    return tris, colors


def _structure_triangles(env: EnvironmentProfile, seed: int):
    area_km2 = (2 * TERRAIN_RADIUS / 1000.0) ** 2
    count = int(round(env.structure_density * area_km2))
    if count == 0:
        return np.zeros((0, 3, 3)), np.zeros((0, 3), dtype=np.uint8)
    rng = substream(seed, "structures")
    tris, cols = [], []
    base = np.asarray(env.structure_color, dtype=np.float64)
    lo, hi = STRUCT_RANGE
    for _ in range(count):
        r = float(np.sqrt(rng.uniform(lo * lo, hi * hi)))
        a = float(rng.uniform(0, 2 * np.pi))
        cx, cy = r * np.cos(a), r * np.sin(a)
        w = float(rng.uniform(8.0, 30.0))
        d = float(rng.uniform(8.0, 30.0))
        h = float(rng.uniform(0.4, 1.8)) * env.structure_height
        # keep rooftops below the top-of-frame elevation angle (~18 deg for a
        # 16:9 frame at 60 deg hfov) so the first sky rows are never occluded
        h = min(h, max(2.0, 0.28 * (r - 25.0)))
        x0, x1 = cx - w / 2, cx + w / 2
        y0, y1 = cy - d / 2, cy + d / 2
        z0, z1 = -2.0, h
        v = np.array([[x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
                      [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]])
        quads = [(4, 7, 6, 5), (0, 4, 5, 1), (2, 6, 7, 3), (1, 5, 6, 2), (3, 7, 4, 0)]
        tone = float(rng.uniform(0.7, 1.15))
        col = np.clip(np.rint(base * tone), 0, 255).astype(np.uint8)
        for qa, qb, qc, qd in quads:
            tris.append([v[qa], v[qb], v[qc]])
            tris.append([v[qa], v[qc], v[qd]])
            cols.extend([col, col])
    return np.array(tris), np.array(cols, dtype=np.uint8)


def _sky(env: EnvironmentProfile, camera: CameraView, rgb: np.ndarray) -> None:
    intr = camera.intrinsics
    h = intr.height
    horizon = intr.cy + intr.focal_px * np.tan(camera.extrinsics.elevation)
    rows = np.arange(h, dtype=np.float64)
    t = np.clip(rows / max(horizon, 1.0), 0.0, 1.0)
    top = np.asarray(env.sky_top, dtype=np.float64)
    hor = np.asarray(env.sky_horizon, dtype=np.float64)
    grad = top[None, :] * (1 - t)[:, None] + hor[None, :] * t[:, None]
    rgb[:, :, :] = np.rint(grad).astype(np.uint8)[:, None, :]


def generate_background(env: EnvironmentProfile, camera: CameraView,
                        seed: int) -> FrameBundle:
    """Sky gradient + heightfield terrain + box skyline; segmap stays zero."""
    intr = camera.intrinsics
    frame = FrameBundle.blank(intr.width, intr.height)
    _sky(env, camera, frame.rgb)

    tris, cols = _terrain_triangles(env, seed)
    shade = _shade(tris, (255, 255, 255), env).astype(np.float64) / 255.0
    cols = np.clip(np.rint(cols * shade), 0, 255).astype(np.uint8)
    ids = np.zeros(len(tris), dtype=np.int32)
    _rasterize_mesh(tris, cols, ids, camera, frame)

    stris, scols = _structure_triangles(env, seed)
    if len(stris):
        shade = _shade(stris, (255, 255, 255), env).astype(np.float64) / 255.0
        scols = np.clip(np.rint(scols * shade), 0, 255).astype(np.uint8)
        ids = np.zeros(len(stris), dtype=np.int32)
        _rasterize_mesh(stris, scols, ids, camera, frame)
    return frame


def render_frame(scene: Scene, camera: CameraView,
                 library: list[AssetModel] | None = None) -> FrameBundle:
    """Render one camera view of one scene instant; bitwise deterministic.

    Instances draw in instance-id order under a strictly-less z-test, so the
    result does not depend on any scheduling. Flock particles write rgb and
    depth but id 0, keeping them out of the segmentation map by construction.
    """
    frame = generate_background(scene.environment, camera, scene.seed)
    env = scene.environment
    for inst in sorted(scene.instances, key=lambda i: i.instance_id):
        tris = pose_transform(inst.asset, inst.pose)
        cols = _shade(tris, inst.asset.base_color, env)
        tid = inst.instance_id if inst.annotatable else 0
        ids = np.full(len(tris), tid, dtype=np.int32)
        _rasterize_mesh(tris, cols, ids, camera, frame)
    return frame
