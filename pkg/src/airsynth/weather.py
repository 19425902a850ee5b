"""Severity-parameterized weather corruption applied to rendered frames.

Both effects rewrite only the RGB buffer; the segmentation map and depth
buffer pass through untouched, so annotations stay valid at any severity.
Fog is depth-aware extinction toward a fog color; snow is screen-space
streaks plus a mild global contrast reduction. Fog severities live on a
2-12% grid, snow on a 5-55% grid; the two scales are deliberately kept as
separate, condition-specific knobs.
"""

from __future__ import annotations

import numpy as np

from .errors import SeverityRange
from .render import FrameBundle
from .rng import substream

FOG_COLOR = (200, 200, 210)
BETA_MAX = 0.01          # extinction 1/m at severity 1.0
FOG_DIST_CAP = 2000.0    # meters; background sentinel clamps here

SNOW_COLOR = (245, 245, 250)
SNOW_DENSITY = 800.0     # streaks per megapixel per unit severity
SNOW_OPACITY = 0.8
SNOW_CONTRAST = 0.15     # contrast loss toward mid-gray at severity 1.0
STREAK_LEN = (4, 14)     # pixels
STREAK_ANGLE_JITTER = 0.15  # radians around vertical


def _check_severity(severity: float) -> None:
    if not (0.0 <= severity <= 1.0):
        raise SeverityRange(f"severity {severity} outside [0, 1]")


def apply_fog(frame: FrameBundle, severity: float,
              fog_color=FOG_COLOR, beta_max=BETA_MAX) -> FrameBundle:
    """Blend each pixel toward fog_color by 1 - exp(-beta * depth)."""
    _check_severity(severity)
    if severity == 0.0:
        return FrameBundle(frame.rgb.copy(), frame.segmap, frame.depth)
    beta = beta_max * severity
    d = np.minimum(frame.depth, FOG_DIST_CAP)
    t = np.exp(-beta * d)[:, :, None]
    fog = np.asarray(fog_color, dtype=np.float64)
    rgb = frame.rgb.astype(np.float64) * t + fog[None, None, :] * (1.0 - t)
    return FrameBundle(np.clip(np.rint(rgb), 0, 255).astype(np.uint8),
                       frame.segmap, frame.depth)


def snow_streak_count(severity: float, width: int, height: int,
                      density=SNOW_DENSITY) -> int:
    return int(round(density * severity * (width * height) / 1.0e6))


def apply_snow(frame: FrameBundle, severity: float, seed: int,
               density=SNOW_DENSITY) -> FrameBundle:
    """Alpha-blend near-vertical streaks plus a global contrast reduction.

    Streaks are the first N of a severity-independent stream, so higher
    severities draw strict supersets and streak coverage is monotone in
    severity for a fixed seed.
    """
    _check_severity(severity)
    if severity == 0.0:
        return FrameBundle(frame.rgb.copy(), frame.segmap, frame.depth)
    h, w = frame.segmap.shape
    n = snow_streak_count(severity, w, h, density)
    n_max = snow_streak_count(1.0, w, h, density)

    rgb = frame.rgb.astype(np.float64)
    rgb = 128.0 + (rgb - 128.0) * (1.0 - SNOW_CONTRAST * severity)

    rng = substream(seed, "snow")
    xs = rng.uniform(0, w, size=n_max)[:n]
    ys = rng.uniform(0, h, size=n_max)[:n]
    lengths = rng.uniform(STREAK_LEN[0], STREAK_LEN[1], size=n_max)[:n]
    angles = rng.uniform(-STREAK_ANGLE_JITTER, STREAK_ANGLE_JITTER, size=n_max)[:n]

    flake = np.asarray(SNOW_COLOR, dtype=np.float64)
    for i in range(n):
        steps = int(np.ceil(lengths[i]))
        t = np.arange(steps + 1)
        px = np.rint(xs[i] + np.sin(angles[i]) * t).astype(np.int64)
        py = np.rint(ys[i] + np.cos(angles[i]) * t).astype(np.int64)
        ok = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        px, py = px[ok], py[ok]
        rgb[py, px] = rgb[py, px] * (1.0 - SNOW_OPACITY) + flake * SNOW_OPACITY

    return FrameBundle(np.clip(np.rint(rgb), 0, 255).astype(np.uint8),
                       frame.segmap, frame.depth)


def streak_pixel_mask(frame_shape: tuple[int, int], severity: float,
                      seed: int, density=SNOW_DENSITY) -> np.ndarray:
    """Boolean mask of pixels touched by streaks (oracle for monotonicity)."""
    h, w = frame_shape
    mask = np.zeros((h, w), dtype=bool)
    if severity == 0.0:
        return mask
    n = snow_streak_count(severity, w, h, density)
    n_max = snow_streak_count(1.0, w, h, density)
    rng = substream(seed, "snow")
    xs = rng.uniform(0, w, size=n_max)[:n]
    ys = rng.uniform(0, h, size=n_max)[:n]
    lengths = rng.uniform(STREAK_LEN[0], STREAK_LEN[1], size=n_max)[:n]
    angles = rng.uniform(-STREAK_ANGLE_JITTER, STREAK_ANGLE_JITTER, size=n_max)[:n]
    for i in range(n):
        steps = int(np.ceil(lengths[i]))
        t = np.arange(steps + 1)
        px = np.rint(xs[i] + np.sin(angles[i]) * t).astype(np.int64)
        py = np.rint(ys[i] + np.cos(angles[i]) * t).astype(np.int64)
        ok = (px >= 0) & (px < w) & (py >= 0) & (py < h)
        mask[py[ok], px[ok]] = True
    return mask


def apply_weather(frame: FrameBundle, condition: str, severity: float,
                  seed: int, severity2: float = 0.0) -> FrameBundle:
    """Dispatch by condition; 'other' composes fog then snow."""
    if condition == "clear":
        return FrameBundle(frame.rgb.copy(), frame.segmap, frame.depth)
    if condition == "fog":
        return apply_fog(frame, severity)
    if condition == "snow":
        return apply_snow(frame, severity, seed)
    if condition == "other":
        return apply_snow(apply_fog(frame, severity), severity2, seed)
    raise ValueError(f"unknown weather condition {condition!r}")
