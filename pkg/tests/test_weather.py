import math

import numpy as np
import pytest

from airsynth.errors import SeverityRange
from airsynth.render import FrameBundle, render_frame
from airsynth.scene import FOG_GRID, PROFILES, SNOW_GRID, WeatherParams, sample_scene
from airsynth.weather import (FOG_COLOR, apply_fog, apply_snow, apply_weather,
                              streak_pixel_mask)


@pytest.fixture
def frame(library, rig_small):
    scn = sample_scene("both", PROFILES["park"], WeatherParams(), library, 31,
                       rig_small.cameras[0])
    return render_frame(scn, rig_small.cameras[0])


def test_fog_severity_zero_identity(frame):
    out = apply_fog(frame, 0.0)
    assert np.array_equal(out.rgb, frame.rgb)


def test_fog_severity_range(frame):
    with pytest.raises(SeverityRange):
        apply_fog(frame, 1.2)
    with pytest.raises(SeverityRange):
        apply_snow(frame, -0.1, seed=0)


def test_fog_saturates_background_at_full_severity(frame):
    out = apply_fog(frame, 1.0)
    bg = frame.depth >= 1e6
    assert bg.any()
    assert (out.rgb[bg] == np.array(FOG_COLOR, dtype=np.uint8)).all()


def test_fog_blend_formula():
    # black pixel at 100 m, severity 6%: independently evaluated blend
    fb = FrameBundle(rgb=np.zeros((2, 2, 3), dtype=np.uint8),
                     segmap=np.zeros((2, 2), dtype=np.int32),
                     depth=np.full((2, 2), 100.0))
    out = apply_fog(fb, 0.06)
    expected = np.rint(np.array(FOG_COLOR) * (1 - math.exp(-0.01 * 0.06 * 100)))
    assert (out.rgb == expected.astype(np.uint8)).all()
    assert tuple(out.rgb[0, 0]) == (12, 12, 12)


def test_fog_label_invariance(frame):
    for sev in FOG_GRID:
        out = apply_fog(frame, sev)
        assert np.array_equal(out.segmap, frame.segmap)
        assert np.array_equal(out.depth, frame.depth)


def test_fog_monotonic_distance_to_fog_color(frame):
    fogc = np.array(FOG_COLOR, dtype=np.float64)
    prev = None
    for sev in (0.0,) + tuple(FOG_GRID):
        out = apply_fog(frame, sev)
        dist = np.abs(out.rgb.astype(np.float64) - fogc).mean()
        if prev is not None:
            assert dist <= prev + 1e-9
        prev = dist


def test_fog_depth_ordering():
    # equal input colors: the deeper pixel is never farther from fog color
    rgb = np.zeros((1, 2, 3), dtype=np.uint8)
    depth = np.array([[50.0, 500.0]])
    fb = FrameBundle(rgb, np.zeros((1, 2), dtype=np.int32), depth)
    out = apply_fog(fb, 0.08)
    fogc = np.array(FOG_COLOR, dtype=np.float64)
    d_shallow = np.abs(out.rgb[0, 0] - fogc).sum()
    d_deep = np.abs(out.rgb[0, 1] - fogc).sum()
    assert d_deep <= d_shallow


def test_snow_identity_and_determinism(frame):
    out0 = apply_snow(frame, 0.0, seed=5)
    assert np.array_equal(out0.rgb, frame.rgb)
    a = apply_snow(frame, 0.55, seed=5)
    b = apply_snow(frame, 0.55, seed=5)
    assert np.array_equal(a.rgb, b.rgb)
    c = apply_snow(frame, 0.55, seed=6)
    assert not np.array_equal(a.rgb, c.rgb)


def test_snow_label_invariance(frame):
    for sev in SNOW_GRID:
        out = apply_snow(frame, sev, seed=2)
        assert np.array_equal(out.segmap, frame.segmap)
        assert np.array_equal(out.depth, frame.depth)


def test_snow_streaks_strictly_increasing(frame):
    shape = frame.segmap.shape
    counts = [int(streak_pixel_mask(shape, s, seed=4).sum()) for s in SNOW_GRID]
    assert all(b > a for a, b in zip(counts, counts[1:]))


def test_snow_streak_masks_nested(frame):
    shape = frame.segmap.shape
    prev = np.zeros(shape, dtype=bool)
    for sev in SNOW_GRID:
        mask = streak_pixel_mask(shape, sev, seed=4)
        assert (prev & ~mask).sum() == 0  # supersets as severity grows
        prev = mask


def test_other_condition_composes(frame):
    out = apply_weather(frame, "other", 0.06, seed=1, severity2=0.25)
    assert np.array_equal(out.segmap, frame.segmap)
    assert not np.array_equal(out.rgb, frame.rgb)


def test_clear_dispatch_identity(frame):
    out = apply_weather(frame, "clear", 0.0, seed=1)
    assert np.array_equal(out.rgb, frame.rgb)
