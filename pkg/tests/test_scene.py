import pytest

from airsynth.assets import CLASS_BIRD, CLASS_DRONE
from airsynth.scene import (BIRD_ONLY, BOTH, BUCKETS, DRONE_ONLY, PROFILES,
                            PROFILE_IDS, VFX_DRONE, WeatherParams, sample_scene)


def test_seven_profiles():
    assert len(PROFILES) == 7
    assert set(PROFILE_IDS) == {"urban_towers", "park", "dynamic_city",
                                "city_blocks", "downtown", "bridge_water",
                                "rural_terrain"}


def test_weather_params_invariants():
    WeatherParams("clear", 0.0)
    WeatherParams("fog", 0.06)
    with pytest.raises(ValueError):
        WeatherParams("clear", 0.1)
    with pytest.raises(ValueError):
        WeatherParams("fog", 0.0)
    with pytest.raises(ValueError):
        WeatherParams("fog", 1.5)


def _counts(scene):
    d = sum(1 for i in scene.instances
            if i.annotatable and i.asset.class_id == CLASS_DRONE)
    b = sum(1 for i in scene.instances
            if i.annotatable and i.asset.class_id == CLASS_BIRD)
    f = sum(1 for i in scene.instances if not i.annotatable)
    return d, b, f


def test_bucket_contracts(library, rig_small):
    cam = rig_small.cameras[0]
    env = PROFILES["park"]
    clear = WeatherParams()
    for seed in range(25):
        for bucket in BUCKETS:
            scn = sample_scene(bucket, env, clear, library, seed, cam)
            d, b, f = _counts(scn)
            if bucket == DRONE_ONLY:
                assert d >= 1 and b == 0 and f == 0
            elif bucket == BIRD_ONLY:
                assert b >= 1 and d == 0 and f == 0
            elif bucket == BOTH:
                assert d >= 1 and b >= 1
            else:
                assert d >= 1 and b == 0 and f >= 10


def test_vfx_flock_not_annotatable(library, rig_small):
    scn = sample_scene(VFX_DRONE, PROFILES["downtown"], WeatherParams(),
                       library, 3, rig_small.cameras[0])
    flock = [i for i in scn.instances if not i.annotatable]
    assert flock and all(i.asset.asset_id == "flock_particle" for i in flock)
    assert scn.flock_particle_count() == len(flock)


def test_instance_ids_unique_and_positive(library, rig_small):
    for seed in range(10):
        scn = sample_scene(BOTH, PROFILES["urban_towers"], WeatherParams(),
                           library, seed, rig_small.cameras[0])
        ids = [i.instance_id for i in scn.instances]
        assert len(set(ids)) == len(ids)
        assert min(ids) >= 1


def test_scene_deterministic_serialization(library, rig_small):
    cam = rig_small.cameras[2]
    env = PROFILES["bridge_water"]
    a = sample_scene(DRONE_ONLY, env, WeatherParams(), library, 99, cam)
    b = sample_scene(DRONE_ONLY, env, WeatherParams(), library, 99, cam)
    assert a.serialize() == b.serialize()
    c = sample_scene(DRONE_ONLY, env, WeatherParams(), library, 100, cam)
    assert a.serialize() != c.serialize()


def test_placement_inside_airspace_shell(library, rig_small):
    import numpy as np
    cam = rig_small.cameras[0]
    rig_pos = np.asarray(cam.extrinsics.rig_position)
    for seed in range(20):
        scn = sample_scene(BOTH, PROFILES["park"], WeatherParams(), library,
                           seed, cam)
        for inst in scn.instances:
            if not inst.annotatable:
                continue
            pos = np.asarray(inst.pose.position)
            assert 2.0 <= pos[2] <= 60.0
            assert np.linalg.norm(pos - rig_pos) <= 150.0 + 1e-9


def test_unknown_bucket_rejected(library):
    with pytest.raises(ValueError):
        sample_scene("nope", PROFILES["park"], WeatherParams(), library, 0)
