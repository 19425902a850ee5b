"""Scene model: environment profiles, weather parameters, and per-frame
scene sampling with placement constrained to the camera-visible airspace.

Placement uses rejection sampling against the annotation size band: every
annotatable instance must project to a box of at least a handful of pixels
and at most ~20% of the image area, so downstream filtering never has to
discard whole frames.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import trajectory as traj
from .assets import (AssetModel, CLASS_BIRD, CLASS_DRONE, FLOCK_ASSET)
from .camera import CameraView, build_rig, unproject
from .errors import RejectionExhausted
from .rng import substream

# content buckets
DRONE_ONLY = "drone_only"
BIRD_ONLY = "bird_only"
BOTH = "both"
VFX_DRONE = "vfx_drone"
BUCKETS = (DRONE_ONLY, BIRD_ONLY, BOTH, VFX_DRONE)

# weather conditions
CLEAR = "clear"
FOG = "fog"
SNOW = "snow"
OTHER = "other"
CONDITIONS = (CLEAR, FOG, SNOW, OTHER)

FOG_GRID = (0.02, 0.04, 0.06, 0.08, 0.10, 0.12)
SNOW_GRID = (0.05, 0.15, 0.25, 0.35, 0.45, 0.55)

# visible-airspace shell (meters): range from the rig, altitude band
RANGE_MIN, RANGE_MAX = 5.0, 150.0
ALT_MIN, ALT_MAX = 2.0, 60.0

PLACEMENT_ATTEMPTS = 1000


@dataclass(frozen=True)
class WeatherParams:
    condition: str = CLEAR
    severity: float = 0.0
    severity2: float = 0.0  # snow component when condition == "other"

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown weather condition {self.condition!r}")
        if (self.condition == CLEAR) != (self.severity == 0.0):
            raise ValueError("clear weather must have severity 0 and vice versa")
        if not (0.0 <= self.severity <= 1.0):
            raise ValueError(f"severity {self.severity} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"condition": self.condition, "severity": self.severity,
                "severity2": self.severity2}


@dataclass(frozen=True)
class EnvironmentProfile:
    profile_id: str
    sky_top: tuple[int, int, int]
    sky_horizon: tuple[int, int, int]
    terrain_amplitude: float   # heightfield amplitude, meters
    terrain_frequency: float   # base noise frequency, 1/m
    terrain_color: tuple[int, int, int]
    structure_density: float   # buildings per square km
    structure_height: float    # mean building height, meters
    structure_color: tuple[int, int, int]
    sun_azimuth: float
    sun_elevation: float
    ambient_level: float


PROFILES: dict[str, EnvironmentProfile] = {p.profile_id: p for p in [
    EnvironmentProfile("urban_towers", (110, 160, 220), (205, 215, 225), 2.0, 0.004,
                       (150, 125, 95), 40.0, 25.0, (135, 130, 125),
                       math.radians(40), math.radians(35), 0.35),
    EnvironmentProfile("park", (120, 175, 235), (215, 225, 230), 4.0, 0.006,
                       (70, 130, 60), 8.0, 10.0, (150, 145, 135),
                       math.radians(120), math.radians(50), 0.40),
    EnvironmentProfile("dynamic_city", (100, 150, 215), (200, 205, 215), 1.5, 0.003,
                       (105, 105, 100), 60.0, 30.0, (120, 125, 135),
                       math.radians(210), math.radians(30), 0.35),
    EnvironmentProfile("city_blocks", (115, 160, 225), (210, 215, 220), 1.0, 0.003,
                       (115, 110, 105), 80.0, 20.0, (160, 150, 140),
                       math.radians(300), math.radians(45), 0.35),
    EnvironmentProfile("downtown", (95, 140, 210), (195, 200, 210), 1.0, 0.002,
                       (95, 95, 95), 120.0, 45.0, (110, 115, 125),
                       math.radians(75), math.radians(25), 0.30),
    EnvironmentProfile("bridge_water", (125, 175, 230), (215, 225, 235), 0.6, 0.002,
                       (55, 95, 125), 15.0, 18.0, (140, 140, 145),
                       math.radians(160), math.radians(40), 0.40),
    EnvironmentProfile("rural_terrain", (130, 180, 235), (225, 230, 225), 9.0, 0.008,
                       (110, 125, 70), 2.0, 6.0, (155, 140, 120),
                       math.radians(250), math.radians(55), 0.45),
]}

PROFILE_IDS = tuple(PROFILES)


@dataclass(frozen=True)
class ObjectInstance:
    instance_id: int
    asset: AssetModel
    pose: traj.Pose
    annotatable: bool
    path: traj.TrajectorySpec | None = None

    def to_dict(self) -> dict:
        d = {
            "instance_id": self.instance_id,
            "asset_id": self.asset.asset_id,
            "class_id": self.asset.class_id,
            "annotatable": self.annotatable,
            "position": [round(v, 6) for v in self.pose.position],
            "yaw": round(self.pose.yaw, 6),
            "pitch": round(self.pose.pitch, 6),
            "roll": round(self.pose.roll, 6),
            "scale": round(self.pose.scale, 6),
        }
        if self.path is not None:
            d["path"] = self.path.to_dict()
        return d


@dataclass(frozen=True)
class Scene:
    instances: tuple[ObjectInstance, ...]
    environment: EnvironmentProfile
    weather: WeatherParams
    time: float
    seed: int

    def instance_table(self) -> dict[int, ObjectInstance]:
        return {i.instance_id: i for i in self.instances}

    def flock_particle_count(self) -> int:
        return sum(1 for i in self.instances if not i.annotatable)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "environment": self.environment.profile_id,
            "weather": self.weather.to_dict(),
            "time": self.time,
            "instances": [i.to_dict() for i in self.instances],
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _default_camera(width=1920, height=1080) -> CameraView:
    return build_rig(6, math.radians(60.0), width, height).cameras[0]


def _posed_corners(asset: AssetModel, pose: traj.Pose) -> np.ndarray:
    """World-space corners of the posed model-space bounding box."""
    pts = asset.mesh.reshape(-1, 3)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    corners = np.array([[x, y, z] for x in (lo[0], hi[0])
                        for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    cy, sy = math.cos(pose.yaw), math.sin(pose.yaw)
    cp, sp = math.cos(pose.pitch), math.sin(pose.pitch)
    cr, sr = math.cos(pose.roll), math.sin(pose.roll)
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    rot = rz @ ry @ rx
    return (corners * pose.scale) @ rot.T + np.asarray(pose.position)


def pose_transform(asset: AssetModel, pose: traj.Pose) -> np.ndarray:
    """Apply pose (scale, yaw/pitch/roll, translate) to the asset mesh."""
    cy, sy = math.cos(pose.yaw), math.sin(pose.yaw)
    cp, sp = math.cos(pose.pitch), math.sin(pose.pitch)
    cr, sr = math.cos(pose.roll), math.sin(pose.roll)
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    rot = rz @ ry @ rx
    tris = asset.mesh * pose.scale
    return tris @ rot.T + np.asarray(pose.position)


def _projected_box(camera: CameraView, corners: np.ndarray):
    """Clipped screen-space box of world points, or None if behind camera."""
    cam = camera.world_to_camera(corners)
    if (cam[:, 2] <= 0.5).any():
        return None
    intr = camera.intrinsics
    u = intr.cx + intr.focal_px * cam[:, 0] / cam[:, 2]
    v = intr.cy + intr.focal_px * cam[:, 1] / cam[:, 2]
    u0 = max(u.min(), 0.0)
    u1 = min(u.max(), float(intr.width))
    v0 = max(v.min(), 0.0)
    v1 = min(v.max(), float(intr.height))
    if u0 >= u1 or v0 >= v1:
        return None
    return u0, v0, u1, v1


def _make_path(pos, class_id, rng) -> traj.TrajectorySpec:
    """Trajectory passing through pos at t=0, orientation source for the pose."""
    r = float(rng.uniform(8.0, 120.0))
    phi = float(rng.uniform(0.0, 2.0 * math.pi))
    period = float(rng.uniform(20.0, 120.0))
    omega = (2.0 * math.pi / period) * (1.0 if rng.random() < 0.5 else -1.0)
    center = (pos[0] - r * math.cos(phi), pos[1] - r * math.sin(phi), 0.0)
    if class_id == CLASS_BIRD:
        return traj.TrajectorySpec(
            kind=traj.BIRD, center=center, radius_start=r, radius_end=r,
            altitude_start=pos[2], altitude_end=pos[2], angular_speed=omega,
            phase=phi, bob_amplitude=float(rng.uniform(0.1, 0.6)),
            flap_frequency=float(rng.uniform(1.0, 4.0)))
    if rng.random() < 0.4:  # spiral
        return traj.TrajectorySpec(
            kind=traj.SPIRAL, center=center, radius_start=r,
            radius_end=float(rng.uniform(8.0, 120.0)), altitude_start=pos[2],
            altitude_end=float(rng.uniform(ALT_MIN, ALT_MAX)),
            angular_speed=omega, phase=phi)
    return traj.TrajectorySpec(
        kind=traj.CIRCULAR, center=center, radius_start=r, radius_end=r,
        altitude_start=pos[2], altitude_end=pos[2], angular_speed=omega, phase=phi)


def _place_instance(asset: AssetModel, camera: CameraView, rng,
                    size_band=True) -> tuple[traj.Pose, traj.TrajectorySpec]:
    """Rejection-sample a pose inside the camera frustum and size band."""
    intr = camera.intrinsics
    w, h = intr.width, intr.height
    max_side = math.sqrt(0.15 * w * h)
    for _ in range(PLACEMENT_ATTEMPTS):
        scale = float(rng.uniform(*asset.scale_range))
        # target apparent size drives the sampling distance
        target_px = math.exp(rng.uniform(math.log(8.0), math.log(max_side)))
        extent = asset.extent() * scale
        dist = intr.focal_px * extent / target_px
        dist = min(max(dist, RANGE_MIN), RANGE_MAX)
        u = float(rng.uniform(0.10 * w, 0.90 * w))
        v = float(rng.uniform(0.10 * h, 0.90 * h))
        pos = unproject(camera, u, v, dist)
        if not (ALT_MIN <= pos[2] <= ALT_MAX):
            continue
        radial = float(np.linalg.norm(pos - np.asarray(camera.extrinsics.rig_position)))
        if not (RANGE_MIN <= radial <= RANGE_MAX):
            continue
        path = _make_path(tuple(pos), asset.class_id, rng)
        base = traj.pose_at(path, 0.0, 60.0)
        pitch = float(rng.uniform(-0.15, 0.15)) if asset.class_id == CLASS_DRONE else 0.0
        pose = traj.Pose(position=tuple(pos), yaw=base.yaw, pitch=pitch,
                         roll=base.roll, scale=scale)
        if size_band:
            box = _projected_box(camera, _posed_corners(asset, pose))
            if box is None:
                continue
            u0, v0, u1, v1 = box
            side = max(u1 - u0, v1 - v0)
            if side < 7.0 or (u1 - u0) * (v1 - v0) > 0.18 * w * h:
                continue
        return pose, path
    raise RejectionExhausted(
        f"no valid placement for {asset.asset_id} in {PLACEMENT_ATTEMPTS} attempts")


def sample_scene(plan_bucket: str, env: EnvironmentProfile, weather: WeatherParams,
                 library: list[AssetModel], seed: int,
                 camera: CameraView | None = None) -> Scene:
    """Sample one frame's worth of world state, deterministic in seed.

    The bucket fixes the content contract: drone_only / bird_only / both
    gate which annotatable classes appear; vfx_drone adds unannotated flock
    particle groups on top of at least one drone.
    """
    if plan_bucket not in BUCKETS:
        raise ValueError(f"unknown bucket {plan_bucket!r}")
    if camera is None:
        camera = _default_camera()
    rng = substream(seed, "scene")
    drones = [a for a in library if a.class_id == CLASS_DRONE]
    birds = [a for a in library if a.class_id == CLASS_BIRD]

    n_drones = n_birds = n_groups = 0
    if plan_bucket == DRONE_ONLY:
        n_drones = int(rng.integers(1, 4))
    elif plan_bucket == BIRD_ONLY:
        n_birds = int(rng.integers(1, 5))
    elif plan_bucket == BOTH:
        n_drones = int(rng.integers(1, 3))
        n_birds = int(rng.integers(1, 4))
    else:  # VFX_DRONE
        n_drones = int(rng.integers(1, 3))
        n_groups = int(rng.integers(1, 4))

    instances: list[ObjectInstance] = []
    next_id = 1
    for _ in range(n_drones):
        asset = drones[int(rng.integers(0, len(drones)))]
        pose, path = _place_instance(asset, camera, rng)
        instances.append(ObjectInstance(next_id, asset, pose, True, path))
        next_id += 1
    for _ in range(n_birds):
        asset = birds[int(rng.integers(0, len(birds)))]
        pose, path = _place_instance(asset, camera, rng)
        instances.append(ObjectInstance(next_id, asset, pose, True, path))
        next_id += 1
    for g in range(n_groups):
        _, group_path = _place_instance(FLOCK_ASSET, camera, rng, size_band=False)
        count = int(rng.integers(10, 41))
        particles = traj.spawn_flock(group_path, count,
                                     int(rng.integers(0, 2**63 - 1)))
        for p in particles:
            pp = traj.pose_at(p, 0.0, 60.0)
            pose = traj.Pose(position=pp.position, yaw=pp.yaw, roll=pp.roll,
                             scale=float(rng.uniform(1.0, 3.0)))
            instances.append(ObjectInstance(next_id, FLOCK_ASSET, pose, False, None))
            next_id += 1

    return Scene(instances=tuple(instances), environment=env, weather=weather,
                 time=0.0, seed=seed)
