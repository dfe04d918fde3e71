import dataclasses
import math

import numpy as np
import pytest

from hullsim.geometry import rotate, wrap_angle
from hullsim.sonar import (OCCLUDED, OUT_OF_FOV, OUT_OF_RANGE, VISIBLE,
                           SonarConfig, poi_visible, ray_cast, scan)
from hullsim.world import Pose2D, VehicleState

from conftest import far_scene, make_scene


def vehicle(x, y, h):
    return VehicleState(pose=Pose2D(x, y, h))


class TestRayCast:
    def test_miss_returns_max_range(self):
        cfg = SonarConfig(max_range=10.0)
        world = far_scene()
        assert ray_cast((0.0, 0.0), 0.0, cfg, world) == 10.0

    def test_perpendicular_wall(self):
        world = make_scene(hull=((2, -5), (3, -5), (3, 5), (2, 5)),
                           labels=("Port",) * 4, poi=(2.0, 0.0))
        cfg = SonarConfig(max_range=10.0)
        assert ray_cast((0.0, 0.0), 0.0, cfg, world) == pytest.approx(2.0)

    def test_obstacle_closer_than_hull(self):
        world = make_scene(hull=((8, -5), (9, -5), (9, 5), (8, 5)),
                           labels=("Port",) * 4, poi=(8.0, 0.0),
                           obstacles=(((4.0, 0.0), 1.0),))
        cfg = SonarConfig(max_range=20.0)
        assert ray_cast((0.0, 0.0), 0.0, cfg, world) == pytest.approx(3.0)


class TestScan:
    def test_empty_scene_all_max_range(self):
        cfg = SonarConfig(n_beams=16, max_range=15.0)
        s = scan(vehicle(0, 0, 0.3), far_scene(), cfg)
        assert len(s.ranges) == len(s.bearings) == 16
        assert all(r == 15.0 for r in s.ranges)

    def test_center_beam_faces_wall(self):
        world = make_scene(hull=((2, -5), (3, -5), (3, 5), (2, 5)),
                           labels=("Port",) * 4, poi=(2.0, 0.0))
        cfg = SonarConfig(n_beams=3, fov=1e-6, max_range=10.0)
        s = scan(vehicle(0, 0, 0), world, cfg)
        assert s.ranges[1] == pytest.approx(2.0, abs=1e-6)

    def test_bearings_evenly_spaced(self):
        cfg = SonarConfig(fov=2.0, n_beams=5)
        b = cfg.bearings()
        assert b[0] == pytest.approx(-1.0)
        assert b[-1] == pytest.approx(1.0)
        steps = np.diff(b)
        assert np.allclose(steps, steps[0])

    def test_golden_scan_bit_exact(self):
        import json
        from pathlib import Path
        from hullsim import standard_scene_path
        from hullsim.world import load_scene
        golden = json.loads(
            (Path(__file__).parent / "data" / "golden_scan.json").read_text())
        cfg = load_scene(standard_scene_path())
        v = vehicle(*golden["pose"])
        s = scan(v, cfg, SonarConfig(n_beams=golden["n_beams"]))
        assert list(s.bearings) == golden["bearings"]
        assert list(s.ranges) == golden["ranges"]

    def test_rotation_invariance(self):
        base = make_scene(hull=((4, -3), (6, -3), (6, 3), (4, 3)),
                          labels=("Port",) * 4, poi=(4.0, 0.0),
                          obstacles=(((-2.0, 1.0), 0.5),))
        cfg = SonarConfig(n_beams=32)
        v = vehicle(0.5, -0.25, 0.7)
        s0 = scan(v, base, cfg)
        for angle in (0.3, 1.2, -2.0, math.pi):
            rotated = dataclasses.replace(
                base,
                hull=tuple(rotate(p, angle) for p in base.hull),
                poi=rotate(base.poi, angle),
                obstacles=tuple(dataclasses.replace(c, center=rotate(c.center, angle))
                                for c in base.obstacles))
            pos = rotate(v.pose.position, angle)
            v_rot = vehicle(pos[0], pos[1], wrap_angle(v.pose.heading + angle))
            s1 = scan(v_rot, rotated, cfg)
            np.testing.assert_allclose(s1.ranges, s0.ranges, rtol=1e-9)


class TestPoiVisible:
    def setup_method(self):
        # square hull to the east, poi on its west face
        self.world = make_scene(hull=((10, -5), (20, -5), (20, 5), (10, 5)),
                                labels=("Port",) * 4, poi=(10.0, 0.0))
        self.cfg = SonarConfig(fov=2 * math.pi / 3, max_range=20.0)

    def test_dead_ahead_visible(self):
        rep = poi_visible(vehicle(0, 0, 0), self.world, self.cfg)
        assert rep.visible and rep.reason == VISIBLE
        assert rep.range == pytest.approx(10.0)
        assert rep.bearing == pytest.approx(0.0)

    def test_behind_is_out_of_fov(self):
        rep = poi_visible(vehicle(0, 0, math.pi), self.world, self.cfg)
        assert not rep.visible and rep.reason == OUT_OF_FOV

    def test_out_of_range(self):
        rep = poi_visible(vehicle(-15, 0, 0), self.world, self.cfg)
        assert not rep.visible and rep.reason == OUT_OF_RANGE
        assert rep.range == pytest.approx(25.0)

    def test_occluded_by_obstacle(self):
        world = make_scene(hull=((10, -5), (20, -5), (20, 5), (10, 5)),
                           labels=("Port",) * 4, poi=(10.0, 0.0),
                           obstacles=(((5.0, 0.0), 1.0),))
        rep = poi_visible(vehicle(0, 0, 0), world, self.cfg)
        assert not rep.visible and rep.reason == OCCLUDED

    def test_poi_on_hull_not_self_occluded(self):
        # the segment ends exactly on the hull face: contact at the poi must not occlude
        rep = poi_visible(vehicle(5, 0, 0), self.world, self.cfg)
        assert rep.visible

    def test_hull_bulge_occludes(self):
        # concave scene: a wall segment juts between the vehicle and the poi
        world = make_scene(
            hull=((10, -5), (20, -5), (20, 5), (10, 5), (10, 2), (4, 1.5),
                  (4, -1.5), (10, -2)),
            labels=("Port",) * 8, poi=(10.0, 0.0))
        rep = poi_visible(vehicle(0, 0.5, 0), world, self.cfg)
        assert not rep.visible and rep.reason == OCCLUDED

    def test_fov_monotonicity(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            v = vehicle(rng.uniform(-5, 8), rng.uniform(-8, 8),
                        rng.uniform(-math.pi, math.pi))
            fovs = sorted(rng.uniform(0.2, 2 * math.pi, size=3))
            vis = [poi_visible(v, self.world,
                               dataclasses.replace(self.cfg, fov=f)).visible
                   for f in fovs]
            for narrower, wider in zip(vis, vis[1:]):
                assert (not narrower) or wider
