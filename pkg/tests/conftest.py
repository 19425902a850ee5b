import math

import numpy as np
import pytest

from airsynth.assets import build_asset_library
from airsynth.camera import build_rig
from airsynth.scene import EnvironmentProfile

SMALL_W, SMALL_H = 640, 360

# one line per acceptance criterion, echoed after the run so the verdicts
# survive pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def library():
    return build_asset_library(0)


@pytest.fixture(scope="session")
def rig_1080p():
    return build_rig(6, math.radians(60.0), 1920, 1080)


@pytest.fixture(scope="session")
def rig_small():
    return build_rig(6, math.radians(60.0), SMALL_W, SMALL_H)


@pytest.fixture
def flat_env():
    """Near-featureless environment: flat dark terrain, no structures."""
    return EnvironmentProfile(
        profile_id="downtown", sky_top=(100, 150, 215), sky_horizon=(200, 205, 215),
        terrain_amplitude=0.1, terrain_frequency=0.002, terrain_color=(60, 60, 60),
        structure_density=0.0, structure_height=10.0, structure_color=(120, 120, 120),
        sun_azimuth=math.radians(40), sun_elevation=math.radians(35),
        ambient_level=0.35)


def bfs_components(grid: np.ndarray) -> list[frozenset]:
    """Flood-fill oracle: 8-connected same-value components of nonzero pixels."""
    h, w = grid.shape
    seen = np.zeros_like(grid, dtype=bool)
    comps = []
    for y in range(h):
        for x in range(w):
            if grid[y, x] == 0 or seen[y, x]:
                continue
            val = grid[y, x]
            stack = [(y, x)]
            seen[y, x] = True
            comp = []
            while stack:
                cy, cx = stack.pop()
                comp.append((cy, cx))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if (0 <= ny < h and 0 <= nx < w and not seen[ny, nx]
                                and grid[ny, nx] == val):
                            seen[ny, nx] = True
                            stack.append((ny, nx))
            comps.append(frozenset(comp))
    return comps
