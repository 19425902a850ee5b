"""Multi-camera rig geometry: pinhole intrinsics and azimuth-distributed views.

The rig is a ring of identical pinhole cameras at a shared position. Azimuth
is measured clockwise from the world +x axis when viewed from above, so
camera i pans right of camera i-1 and a point leaving camera i's right image
edge enters camera i+1's left edge. World frame is x/y horizontal, z up.
Camera frame follows the x-right / y-down / z-forward convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidFov

NEAR_PLANE = 0.01  # meters
FAR_DEPTH = 1.0e6  # background depth sentinel, meters

BEHIND_CAMERA = object()  # sentinel returned by project()


@dataclass(frozen=True)
class CameraIntrinsics:
    width: int
    height: int
    focal_px: float

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0


@dataclass(frozen=True)
class CameraExtrinsics:
    rig_position: tuple[float, float, float]
    azimuth: float
    elevation: float = 0.0


@dataclass(frozen=True)
class CameraView:
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics

    def rotation(self) -> np.ndarray:
        """World-to-camera rotation, rows = (right, down, forward)."""
        a = self.extrinsics.azimuth
        e = self.extrinsics.elevation
        ca, sa = math.cos(a), math.sin(a)
        ce, se = math.cos(e), math.sin(e)
        forward = (ce * ca, -ce * sa, se)
        right = (-sa, -ca, 0.0)
        down = (se * ca, -se * sa, -ce)
        return np.array([right, down, forward], dtype=np.float64)

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        """Transform (..., 3) world points into the camera frame."""
        pos = np.asarray(self.extrinsics.rig_position, dtype=np.float64)
        return (np.asarray(points, dtype=np.float64) - pos) @ self.rotation().T


@dataclass(frozen=True)
class Rig:
    cameras: tuple[CameraView, ...]

    @property
    def camera_count(self) -> int:
        return len(self.cameras)

    def to_dict(self) -> dict:
        intr = self.cameras[0].intrinsics
        return {
            "camera_count": self.camera_count,
            "width": intr.width,
            "height": intr.height,
            "focal_px": intr.focal_px,
            "rig_position": list(self.cameras[0].extrinsics.rig_position),
            "azimuths_deg": [math.degrees(c.extrinsics.azimuth) for c in self.cameras],
            "elevation": self.cameras[0].extrinsics.elevation,
        }


def focal_from_hfov(width: int, hfov: float) -> float:
    return (width / 2.0) / math.tan(hfov / 2.0)


def build_rig(camera_count: int, hfov: float, width: int, height: int,
              rig_position=(0.0, 0.0, 1.8), elevation: float = 0.0) -> Rig:
    """Ring of camera_count identical cameras, azimuth i * 2pi / camera_count."""
    if camera_count < 1:
        raise ValueError(f"camera_count must be >= 1, got {camera_count}")
    if not (0.0 < hfov < math.pi):
        raise InvalidFov(f"hfov must lie in (0, pi), got {hfov}")
    intr = CameraIntrinsics(width=width, height=height, focal_px=focal_from_hfov(width, hfov))
    pos = tuple(float(v) for v in rig_position)
    cams = tuple(
        CameraView(intr, CameraExtrinsics(pos, azimuth=i * 2.0 * math.pi / camera_count,
                                          elevation=elevation))
        for i in range(camera_count)
    )
    return Rig(cams)


def project(camera: CameraView, world_point):
    """Pinhole projection to sub-pixel (u, v); BEHIND_CAMERA if z <= near plane.

    The result may lie outside image bounds -- clipping is the rasterizer's job.
    """
    p = camera.world_to_camera(np.asarray(world_point, dtype=np.float64))
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    if z <= NEAR_PLANE:
        return BEHIND_CAMERA
    intr = camera.intrinsics
    return (intr.cx + intr.focal_px * x / z, intr.cy + intr.focal_px * y / z)


def unproject(camera: CameraView, u: float, v: float, depth: float) -> np.ndarray:
    """World point whose projection is (u, v) at forward distance `depth`."""
    intr = camera.intrinsics
    x = (u - intr.cx) / intr.focal_px * depth
    y = (v - intr.cy) / intr.focal_px * depth
    cam_pt = np.array([x, y, depth], dtype=np.float64)
    pos = np.asarray(camera.extrinsics.rig_position, dtype=np.float64)
    return camera.rotation().T @ cam_pt + pos
