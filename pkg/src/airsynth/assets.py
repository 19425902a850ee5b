"""Procedural asset library: 15 drone models (8 payload-equipped, 7 plain)
and 8 bird models, built from primitive solids.

Mesh geometry is a fixed function of the asset index, so every seed produces
the same topology; the seed only drives base colors and the per-asset scale
jitter range. Meshes are (T, 3, 3) float arrays of triangles in model space,
meters, sized so silhouettes read correctly at surveillance distances.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .rng import substream

CLASS_DRONE = 0
CLASS_BIRD = 1

PAYLOAD_NONE = "none"
PAYLOAD_KINDS = ("box", "bag", "gun", "spray_kit")

DRONE_COUNT = 15
PAYLOAD_DRONE_COUNT = 8
BIRD_COUNT = 8


@dataclass(frozen=True)
class AssetModel:
    asset_id: str
    class_id: int
    payload_kind: str
    mesh: np.ndarray  # (T, 3, 3) triangles, model space meters
    base_color: tuple[int, int, int]
    scale_range: tuple[float, float]

    def extent(self) -> float:
        """Model-space bounding-box diagonal, meters."""
        lo = self.mesh.reshape(-1, 3).min(axis=0)
        hi = self.mesh.reshape(-1, 3).max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def topology_hash(self) -> str:
        return hashlib.blake2b(
            np.ascontiguousarray(self.mesh).tobytes(), digest_size=8
        ).hexdigest()

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "class_id": self.class_id,
            "payload_kind": self.payload_kind,
            "triangle_count": int(self.mesh.shape[0]),
            "topology_hash": self.topology_hash(),
            "base_color": list(self.base_color),
            "scale_range": list(self.scale_range),
        }


# --- primitive solids -------------------------------------------------------

def _box(cx, cy, cz, sx, sy, sz):
    x0, x1 = cx - sx / 2, cx + sx / 2
    y0, y1 = cy - sy / 2, cy + sy / 2
    z0, z1 = cz - sz / 2, cz + sz / 2
    v = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ])
    quads = [(0, 1, 2, 3), (4, 7, 6, 5), (0, 4, 5, 1),
             (2, 6, 7, 3), (1, 5, 6, 2), (3, 7, 4, 0)]
    tris = []
    for a, b, c, d in quads:
        tris.append([v[a], v[b], v[c]])
        tris.append([v[a], v[c], v[d]])
    return np.array(tris)


def _disc(cx, cy, cz, radius, sides=8):
    """Flat n-gon fan in the z=cz plane (rotor disc)."""
    tris = []
    for i in range(sides):
        a0 = 2 * math.pi * i / sides
        a1 = 2 * math.pi * (i + 1) / sides
        tris.append([
            [cx, cy, cz],
            [cx + radius * math.cos(a0), cy + radius * math.sin(a0), cz],
            [cx + radius * math.cos(a1), cy + radius * math.sin(a1), cz],
        ])
    return np.array(tris)


def _prism(cx, cy, cz, rx, ry, sz, sides=6):
    """Elliptical prism along z: side quads plus top/bottom fans."""
    tris = []
    z0, z1 = cz - sz / 2, cz + sz / 2
    ring = [(cx + rx * math.cos(2 * math.pi * i / sides),
             cy + ry * math.sin(2 * math.pi * i / sides)) for i in range(sides)]
    for i in range(sides):
        (xa, ya), (xb, yb) = ring[i], ring[(i + 1) % sides]
        tris.append([[xa, ya, z0], [xb, yb, z0], [xb, yb, z1]])
        tris.append([[xa, ya, z0], [xb, yb, z1], [xa, ya, z1]])
        tris.append([[cx, cy, z1], [xa, ya, z1], [xb, yb, z1]])
        tris.append([[cx, cy, z0], [xb, yb, z0], [xa, ya, z0]])
    return np.array(tris)


def _wing(root, tip, chord, sweep):
    """Tapered wing as two triangles between a root edge and a tip point."""
    rx, ry, rz = root
    tx, ty, tz = tip
    a = [rx - chord / 2, ry, rz]
    b = [rx + chord / 2, ry, rz]
    t0 = [tx + sweep, ty, tz]
    return np.array([[a, b, t0], [a, t0, b]])


# --- payloads ---------------------------------------------------------------

def _payload_mesh(kind: str, hang: float):
    if kind == "box":
        return _box(0, 0, -hang, 0.22, 0.22, 0.18)
    if kind == "bag":
        return np.concatenate([
            _box(0, 0, -hang, 0.26, 0.16, 0.22),
            _box(0, 0, -hang + 0.14, 0.04, 0.04, 0.1),  # strap
        ])
    if kind == "gun":
        return np.concatenate([
            _box(0.1, 0, -hang, 0.42, 0.06, 0.07),      # barrel
            _box(-0.1, 0, -hang - 0.06, 0.1, 0.05, 0.1),  # grip
        ])
    if kind == "spray_kit":
        return np.concatenate([
            _prism(0, 0, -hang, 0.12, 0.12, 0.24, sides=6),  # tank
            _box(0, 0.2, -hang - 0.1, 0.5, 0.03, 0.02),      # boom
        ])
    raise ValueError(f"unknown payload kind {kind!r}")


# --- asset meshes -----------------------------------------------------------

def _drone_mesh(index: int, payload_kind: str) -> np.ndarray:
    # Rotor count cycles through quad / hexa / octo frames; body and arm
    # dimensions step deterministically with the index for silhouette variety.
    arms = (4, 6, 8)[index % 3]
    body = 0.24 + 0.03 * (index % 5)
    arm_len = 0.28 + 0.04 * (index % 4)
    rotor_r = 0.10 + 0.015 * (index % 3)
    parts = [_box(0, 0, 0, body, body, body * 0.45)]
    for i in range(arms):
        a = 2 * math.pi * i / arms + math.pi / arms
        ex, ey = arm_len * math.cos(a), arm_len * math.sin(a)
        # thin arm beam from body to rotor hub, rotated into the arm direction
        mx, my = ex / 2, ey / 2
        beam = _rot_z(_box(mx, my, 0.02, arm_len * 0.9, 0.05, 0.04), a)
        parts.append(beam)
        parts.append(_disc(ex, ey, 0.07, rotor_r))
        parts.append(_box(ex, ey, 0.03, 0.05, 0.05, 0.08))  # motor pod
    # landing skids
    parts.append(_box(0, -body * 0.45, -body * 0.4, body * 1.1, 0.03, 0.03))
    parts.append(_box(0, body * 0.45, -body * 0.4, body * 1.1, 0.03, 0.03))
    if payload_kind != PAYLOAD_NONE:
        parts.append(_payload_mesh(payload_kind, hang=body * 0.45 + 0.18))
    return np.concatenate(parts)


def _rot_z(tris: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    # beams are built axis-aligned at their midpoint; rotate about the origin
    # is wrong for them, so rotate about their own centroid instead
    centroid = tris.reshape(-1, 3).mean(axis=0)
    return (tris - centroid) @ rot.T + centroid


def _bird_mesh(index: int) -> np.ndarray:
    span = 0.5 + 0.12 * index          # wingspan 0.5 .. 1.34 m
    body_len = 0.22 + 0.04 * index
    chord = 0.12 + 0.02 * (index % 3)
    sweep = 0.04 * (index % 4) - 0.06
    parts = [
        _prism(0, 0, 0, body_len / 2, body_len / 5, body_len / 4, sides=6),
        _wing((0, 0, 0.01), (0, span / 2, 0.05), chord, sweep),
        _wing((0, 0, 0.01), (0, -span / 2, 0.05), chord, sweep),
        # tail fan
        np.array([[[-body_len / 2, 0, 0],
                   [-body_len / 2 - 0.12, 0.06, 0.01],
                   [-body_len / 2 - 0.12, -0.06, 0.01]]]),
    ]
    return np.concatenate(parts)


def flock_particle_mesh() -> np.ndarray:
    """Tiny two-triangle 'bowtie' used for unannotated flock clutter."""
    s = 0.1
    return np.array([
        [[0, 0, 0], [-s, s, 0.02], [-s * 0.4, s * 0.5, 0]],
        [[0, 0, 0], [-s * 0.4, -s * 0.5, 0], [-s, -s, 0.02]],
    ])


FLOCK_ASSET = AssetModel(
    asset_id="flock_particle",
    class_id=CLASS_BIRD,
    payload_kind=PAYLOAD_NONE,
    mesh=flock_particle_mesh(),
    base_color=(60, 60, 65),
    scale_range=(1.0, 3.0),
)


# --- library ----------------------------------------------------------------

_DRONE_PALETTE = np.array([
    (40, 40, 45), (230, 230, 235), (200, 60, 50), (60, 90, 200),
    (245, 200, 60), (90, 90, 95), (30, 120, 70), (240, 130, 40),
])
_BIRD_PALETTE = np.array([
    (50, 45, 40), (120, 100, 80), (200, 200, 205), (90, 70, 55),
    (30, 30, 32), (160, 150, 140),
])


def build_asset_library(seed: int) -> list[AssetModel]:
    """23 assets: 15 drones (indices 0-7 carry payloads) + 8 birds.

    Same seed -> bit-identical library; different seeds share mesh topology
    and differ only in colors and scale jitter.
    """
    color_rng = substream(seed, "asset_colors")
    scale_rng = substream(seed, "asset_scales")
    assets = []
    for i in range(DRONE_COUNT):
        payload = PAYLOAD_KINDS[i % 4] if i < PAYLOAD_DRONE_COUNT else PAYLOAD_NONE
        base = _DRONE_PALETTE[i % len(_DRONE_PALETTE)]
        jitter = color_rng.integers(-25, 26, size=3)
        color = tuple(int(v) for v in np.clip(base + jitter, 0, 255))
        lo = float(scale_rng.uniform(0.75, 0.95))
        hi = float(scale_rng.uniform(1.05, 1.35))
        assets.append(AssetModel(
            asset_id=f"drone_{i:02d}",
            class_id=CLASS_DRONE,
            payload_kind=payload,
            mesh=_drone_mesh(i, payload),
            base_color=color,
            scale_range=(lo, hi),
        ))
    for i in range(BIRD_COUNT):
        base = _BIRD_PALETTE[i % len(_BIRD_PALETTE)]
        jitter = color_rng.integers(-20, 21, size=3)
        color = tuple(int(v) for v in np.clip(base + jitter, 0, 255))
        lo = float(scale_rng.uniform(0.7, 0.95))
        hi = float(scale_rng.uniform(1.05, 1.5))
        assets.append(AssetModel(
            asset_id=f"bird_{i:02d}",
            class_id=CLASS_BIRD,
            payload_kind=PAYLOAD_NONE,
            mesh=_bird_mesh(i),
            base_color=color,
            scale_range=(lo, hi),
        ))
    return assets


def serialize_library(assets: list[AssetModel]) -> str:
    import json
    return json.dumps([a.to_dict() for a in assets], indent=1)
