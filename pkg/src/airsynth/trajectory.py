"""Parametric flight paths: circular / spiral drone orbits, oscillatory bird
flight, and jittered flock-particle motion derived from a group path."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import OutOfRange
from .rng import substream

CIRCULAR = "circular"
SPIRAL = "spiral"
BIRD = "bird"
FLOCK_PARTICLE = "flock_particle"

MAX_BANK = math.radians(30.0)
FLOCK_JITTER_RADIUS = 3.0  # meters


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0
    scale: float = 1.0


@dataclass(frozen=True)
class TrajectorySpec:
    kind: str
    center: tuple[float, float, float]
    radius_start: float
    radius_end: float
    altitude_start: float
    altitude_end: float
    angular_speed: float  # rad/s, nonzero
    phase: float = 0.0
    bob_amplitude: float = 0.0  # bird / flock only
    flap_frequency: float = 0.0  # Hz, bird / flock only

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "center": list(self.center),
            "radius": [self.radius_start, self.radius_end],
            "altitude": [self.altitude_start, self.altitude_end],
            "angular_speed": self.angular_speed,
            "phase": self.phase,
            "bob_amplitude": self.bob_amplitude,
            "flap_frequency": self.flap_frequency,
        }


def pose_at(spec: TrajectorySpec, t: float, duration: float) -> Pose:
    """Evaluate the path at time t in [0, duration].

    Circular paths keep radius/altitude fixed; spirals interpolate both
    linearly from start to end over the duration. Bird kinds add a vertical
    bob at the flap frequency, head along the path tangent, and bank with a
    roll proportional to angular_speed * radius, clamped to +-30 degrees.
    """
    if duration <= 0.0:
        raise OutOfRange(f"duration must be positive, got {duration}")
    if not (0.0 <= t <= duration):
        raise OutOfRange(f"t={t} outside [0, {duration}]")

    frac = t / duration
    if spec.kind == CIRCULAR:
        r, alt = spec.radius_start, spec.altitude_start
    else:
        r = spec.radius_start + (spec.radius_end - spec.radius_start) * frac
        alt = spec.altitude_start + (spec.altitude_end - spec.altitude_start) * frac

    theta = spec.angular_speed * t + spec.phase
    cx, cy, cz = spec.center
    z = cz + alt
    bob = 0.0
    if spec.kind in (BIRD, FLOCK_PARTICLE):
        bob = spec.bob_amplitude * math.sin(2.0 * math.pi * spec.flap_frequency * t)
    pos = (cx + r * math.cos(theta), cy + r * math.sin(theta), z + bob)

    yaw = theta + math.copysign(math.pi / 2.0, spec.angular_speed)
    roll = 0.0
    if spec.kind in (BIRD, FLOCK_PARTICLE):
        roll = max(-MAX_BANK, min(MAX_BANK, 0.05 * spec.angular_speed * r))
    return Pose(position=pos, yaw=yaw, roll=roll)


def spawn_flock(group_spec: TrajectorySpec, count: int, seed: int) -> list[TrajectorySpec]:
    """Derive `count` flock-particle specs jittered within 3 m of the group path."""
    if not (10 <= count <= 40):
        raise ValueError(f"flock size must be in [10, 40], got {count}")
    rng = substream(seed, "flock")
    particles = []
    for _ in range(count):
        # uniform in a 3 m sphere
        while True:
            off = rng.uniform(-1.0, 1.0, size=3)
            if off @ off <= 1.0:
                break
        off = off * FLOCK_JITTER_RADIUS
        cx, cy, cz = group_spec.center
        particles.append(replace(
            group_spec,
            kind=FLOCK_PARTICLE,
            center=(cx + off[0], cy + off[1], cz + off[2]),
            phase=group_spec.phase + rng.uniform(-0.3, 0.3),
            bob_amplitude=max(0.05, group_spec.bob_amplitude * rng.uniform(0.5, 1.5)),
            flap_frequency=max(0.5, group_spec.flap_frequency * rng.uniform(0.7, 1.3)),
        ))
    return particles
