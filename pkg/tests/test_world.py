import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hullsim import standard_scene_path
from hullsim.world import (Bounds, ControlInput, NoSuchRegion,
                           Pose2D, SceneError, VehicleState, WorldState,
                           check_collision, distance_to_boundary, load_scene,
                           parse_scene, region_waypoints, scene_to_dict,
                           step_vehicle, step_world)

from conftest import make_scene


def vehicle(x=0.0, y=0.0, h=0.0, surge=0.0):
    return VehicleState(pose=Pose2D(x, y, h), surge=surge)


class TestStepVehicle:
    def setup_method(self):
        self.cfg = make_scene()

    def test_zero_input_keeps_pose(self):
        v = vehicle(1.0, 2.0, 0.5)
        out = step_vehicle(v, ControlInput(0, 0), 0.1, self.cfg)
        assert out.pose == v.pose

    def test_straight_line(self):
        out = step_vehicle(vehicle(), ControlInput(1.0, 0.0), 1.0, self.cfg)
        assert out.pose.x == pytest.approx(1.0)
        assert out.pose.y == pytest.approx(0.0)
        assert out.pose.heading == 0.0

    def test_semi_implicit_turn_then_move(self):
        cfg = make_scene(omega_max=2.0)
        out = step_vehicle(vehicle(), ControlInput(1.0, math.pi / 2), 1.0, cfg)
        # heading updates first, translation uses the new heading
        assert out.pose.heading == pytest.approx(math.pi / 2)
        assert out.pose.x == pytest.approx(0.0, abs=1e-12)
        assert out.pose.y == pytest.approx(1.0)

    def test_inputs_clamped(self):
        out = step_vehicle(vehicle(), ControlInput(99.0, -99.0), 0.1, self.cfg)
        assert out.surge == self.cfg.v_max
        assert out.yaw_rate == -self.cfg.omega_max

    def test_no_reverse(self):
        out = step_vehicle(vehicle(), ControlInput(-5.0, 0.0), 0.1, self.cfg)
        assert out.surge == 0.0

    @given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), max_size=30))
    @settings(deadline=None, max_examples=50)
    def test_heading_always_normalized(self, cmds):
        cfg = make_scene()
        v = vehicle()
        for surge, yaw in cmds:
            v = step_vehicle(v, ControlInput(surge, yaw), cfg.dt, cfg)
            assert -math.pi < v.pose.heading <= math.pi


class TestBoundaryDistance:
    def test_hull_vertex_is_zero(self):
        cfg = make_scene()
        assert distance_to_boundary((0.0, 0.0), cfg) == 0.0

    def test_center_of_unit_square(self):
        cfg = make_scene()
        assert distance_to_boundary((0.5, 0.5), cfg) == pytest.approx(0.5)

    def test_obstacle_interior_is_zero(self):
        cfg = make_scene(obstacles=(((5.0, 5.0), 1.0),))
        assert distance_to_boundary((5.2, 5.0), cfg) == 0.0

    def test_obstacle_distance(self):
        cfg = make_scene(obstacles=(((5.0, 0.5), 1.0),))
        assert distance_to_boundary((9.0, 0.5), cfg) == pytest.approx(3.0)


class TestCollision:
    def setup_method(self):
        self.cfg = make_scene(bounds=Bounds(-10, -10, 10, 10))

    def world_at(self, fx, fy, lx=8.0, ly=8.0):
        return WorldState(0.0, vehicle(lx, ly), vehicle(fx, fy))

    def test_clear(self):
        assert not check_collision(self.world_at(5.0, 5.0), self.cfg)

    def test_coincident_with_leader(self):
        assert check_collision(self.world_at(8.0, 8.0), self.cfg)

    def test_exactly_d_col_is_clear(self):
        # strict inequality at the collision threshold
        w = self.world_at(1.0 + self.cfg.d_col, 0.5)
        assert distance_to_boundary((1.0 + self.cfg.d_col, 0.5), self.cfg) == pytest.approx(self.cfg.d_col)
        assert not check_collision(w, self.cfg)

    def test_out_of_bounds(self):
        assert check_collision(self.world_at(11.0, 5.0), self.cfg)


class TestStepWorld:
    def setup_method(self):
        self.cfg = make_scene(bounds=Bounds(-50, -50, 50, 50))
        self.world = WorldState(0.0, vehicle(8.0, 8.0), vehicle(5.0, 5.0))

    def test_zero_inputs_only_time_advances(self):
        out = step_world(self.world, self.cfg, ControlInput(), ControlInput())
        assert out.time == pytest.approx(self.cfg.dt)
        assert out.leader.pose == self.world.leader.pose
        assert out.follower.pose == self.world.follower.pose

    def test_collided_world_is_frozen(self):
        collided = dataclasses.replace(self.world, collided=True)
        out = step_world(collided, self.cfg, ControlInput(1, 0), ControlInput(1, 0))
        assert out is collided

    def test_replay_determinism(self):
        rng = np.random.default_rng(3)
        cmds = [(ControlInput(*rng.uniform(-1, 1, 2)), ControlInput(*rng.uniform(-1, 1, 2)))
                for _ in range(50)]
        def run():
            w = self.world
            for lc, fc in cmds:
                w = step_world(w, self.cfg, lc, fc)
            return w
        assert run() == run()

    def test_translation_equivariance(self):
        t = (3.7, -2.1)
        cfg2 = dataclasses.replace(
            self.cfg,
            hull=tuple((x + t[0], y + t[1]) for x, y in self.cfg.hull),
            poi=(self.cfg.poi[0] + t[0], self.cfg.poi[1] + t[1]),
            bounds=Bounds(self.cfg.bounds.xmin + t[0], self.cfg.bounds.ymin + t[1],
                          self.cfg.bounds.xmax + t[0], self.cfg.bounds.ymax + t[1]))
        w1 = self.world
        w2 = WorldState(0.0, vehicle(8.0 + t[0], 8.0 + t[1]),
                        vehicle(5.0 + t[0], 5.0 + t[1]))
        cmds = [(ControlInput(0.8, 0.3), ControlInput(0.5, -0.2))] * 40
        for lc, fc in cmds:
            w1 = step_world(w1, self.cfg, lc, fc)
            w2 = step_world(w2, cfg2, lc, fc)
        assert w2.follower.pose.x == pytest.approx(w1.follower.pose.x + t[0], abs=1e-9)
        assert w2.follower.pose.y == pytest.approx(w1.follower.pose.y + t[1], abs=1e-9)
        assert w2.follower.pose.heading == w1.follower.pose.heading


class TestRegionWaypoints:
    def test_single_edge_offsets_outward(self):
        cfg = make_scene(standoff=0.2, waypoint_spacing=10.0)
        wps = region_waypoints(cfg, "Port")
        # bottom edge of the ccw unit square, outward normal is -y
        assert len(wps) == 2
        for wp in wps:
            assert wp.position[1] == pytest.approx(-0.2)
            assert wp.heading == pytest.approx(math.pi / 2)

    def test_spacing_respected(self):
        cfg = make_scene(waypoint_spacing=0.25)
        wps = region_waypoints(cfg, "Port")
        assert len(wps) == 5
        xs = [wp.position[0] for wp in wps]
        assert xs == sorted(xs)
        for a, b in zip(xs, xs[1:]):
            assert b - a <= 0.25 + 1e-12

    def test_whole_hull_covers_all_edges(self):
        cfg = make_scene(standoff=0.2, waypoint_spacing=10.0)
        wps = region_waypoints(cfg, "WholeHull")
        assert len(wps) == 8  # 4 edges x 2 endpoints
        # all waypoints sit outside the hull
        from hullsim.geometry import point_in_polygon
        for wp in wps:
            assert not point_in_polygon(wp.position, cfg.hull)

    def test_missing_region(self):
        cfg = make_scene(labels=("Port", "Port", "Port", "Port"))
        with pytest.raises(NoSuchRegion):
            region_waypoints(cfg, "Stern")


class TestSceneFile:
    def test_standard_scene_loads(self):
        cfg = load_scene(standard_scene_path())
        assert len(cfg.hull) == len(cfg.edge_labels) == 7
        assert cfg.dt == 0.1

    def test_round_trip(self):
        cfg = load_scene(standard_scene_path())
        assert parse_scene(scene_to_dict(cfg)) == cfg

    def test_bad_schema(self):
        data = scene_to_dict(load_scene(standard_scene_path()))
        data["schema"] = 99
        with pytest.raises(SceneError):
            parse_scene(data)

    def test_label_count_mismatch(self):
        data = scene_to_dict(load_scene(standard_scene_path()))
        data["edge_labels"] = data["edge_labels"][:-1]
        with pytest.raises(SceneError):
            parse_scene(data)

    def test_poi_must_hug_hull(self):
        with pytest.raises(SceneError):
            make_scene(poi=(0.5, 9.0), standoff=3.0)

    def test_self_intersecting_hull_rejected(self):
        with pytest.raises(SceneError):
            make_scene(hull=((0, 0), (1, 1), (1, 0), (0, 1)),
                       labels=("Port",) * 4, poi=(0, 0))
