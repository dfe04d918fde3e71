"""Planar world model: hull scene, vehicle kinematics, fixed-step evolution.

Two vehicles (teleoperated leader, learned follower) move as planar unicycles
at a fixed dt around a labeled hull polygon with circular obstacles and a
point of interest (PoI) on the hull. All state transitions are pure value
updates, so worlds replay bit-exactly from a recorded input sequence.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import yaml

from . import geometry as geo
from .geometry import Point

AUTONOMOUS = "Autonomous"
MANUAL = "Manual"

REGIONS = ("Port", "Starboard", "Bow", "Stern")
WHOLE_HULL = "WholeHull"


class SceneError(Exception):
    """Scene file missing, malformed, or violating a structural invariant."""


class NoSuchRegion(Exception):
    """No hull edge carries the requested region label."""


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", geo.wrap_angle(self.heading))

    @property
    def position(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class VehicleState:
    pose: Pose2D
    surge: float = 0.0
    yaw_rate: float = 0.0


@dataclass(frozen=True)
class ControlInput:
    surge_cmd: float = 0.0
    yaw_rate_cmd: float = 0.0


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float


@dataclass(frozen=True)
class Bounds:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, p: Point) -> bool:
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax


@dataclass(frozen=True)
class WorldConfig:
    hull: tuple[Point, ...]
    edge_labels: tuple[str, ...]
    obstacles: tuple[Circle, ...]
    poi: Point
    bounds: Bounds
    dt: float = 0.1
    v_max: float = 1.0
    omega_max: float = 1.0
    standoff: float = 3.0
    waypoint_spacing: float = 5.0
    d_col: float = 0.5
    # optional leader patrol route for training/eval (scene file key `patrol`)
    patrol: tuple[Point, ...] = ()

    def validate(self) -> None:
        if len(self.hull) < 3:
            raise SceneError("hull polygon needs at least 3 vertices")
        if len(self.edge_labels) != len(self.hull):
            raise SceneError(
                f"{len(self.hull)} hull edges but {len(self.edge_labels)} labels"
            )
        for lbl in self.edge_labels:
            if lbl not in REGIONS:
                raise SceneError(f"unknown edge label {lbl!r}")
        if geo.polygon_edges_intersect(self.hull):
            raise SceneError("hull polygon self-intersects")
        if self.dt <= 0:
            raise SceneError("dt must be > 0")
        for c in self.obstacles:
            if c.radius <= 0:
                raise SceneError("obstacle radius must be > 0")
        d_poi = _hull_distance(self.poi, self.hull)
        if d_poi > self.standoff:
            raise SceneError(
                f"poi is {d_poi:.2f} m from the hull, beyond standoff {self.standoff}"
            )


@dataclass(frozen=True)
class WorldState:
    time: float
    leader: VehicleState
    follower: VehicleState
    leader_mode: str = AUTONOMOUS
    collided: bool = False


@dataclass(frozen=True)
class Waypoint:
    position: Point
    heading: float


def clamp_input(cmd: ControlInput, config: WorldConfig) -> ControlInput:
    return ControlInput(
        surge_cmd=min(config.v_max, max(0.0, cmd.surge_cmd)),
        yaw_rate_cmd=min(config.omega_max, max(-config.omega_max, cmd.yaw_rate_cmd)),
    )


def step_vehicle(state: VehicleState, cmd: ControlInput, dt: float, config: WorldConfig) -> VehicleState:
    """Semi-implicit unicycle update: turn first, then translate along the new heading."""
    cmd = clamp_input(cmd, config)
    heading = geo.wrap_angle(state.pose.heading + cmd.yaw_rate_cmd * dt)
    x = state.pose.x + cmd.surge_cmd * math.cos(heading) * dt
    y = state.pose.y + cmd.surge_cmd * math.sin(heading) * dt
    return VehicleState(
        pose=Pose2D(x, y, heading),
        surge=cmd.surge_cmd,
        yaw_rate=cmd.yaw_rate_cmd,
    )


def _hull_distance(p: Point, hull: tuple[Point, ...]) -> float:
    n = len(hull)
    best = math.inf
    for i in range(n):
        d = geo.point_segment_distance(p, hull[i], hull[(i + 1) % n])
        if d < best:
            best = d
    return best


def nearest_boundary_point(p: Point, config: WorldConfig) -> tuple[float, Point]:
    """Distance and closest point on the hull boundary or any obstacle circle.

    Inside an obstacle both are taken as 0 at p itself.
    """
    best = math.inf
    best_pt: Point = p
    n = len(config.hull)
    for i in range(n):
        q = geo.closest_point_on_segment(p, config.hull[i], config.hull[(i + 1) % n])
        d = geo.dist(p, q)
        if d < best:
            best, best_pt = d, q
    for c in config.obstacles:
        to_p = geo.sub(p, c.center)
        r = geo.norm(to_p)
        d = r - c.radius
        if d <= 0.0:
            return 0.0, p
        if d < best:
            best = d
            u = geo.unit(to_p)
            best_pt = geo.add(c.center, geo.scale(u, c.radius))
    return best, best_pt


def distance_to_boundary(p: Point, config: WorldConfig) -> float:
    """Minimum distance from p to the hull boundary and all obstacles (0 inside an obstacle)."""
    return nearest_boundary_point(p, config)[0]


def check_collision(state: WorldState, config: WorldConfig, d_col: float | None = None) -> bool:
    d_col = config.d_col if d_col is None else d_col
    fp = state.follower.pose.position
    if not config.bounds.contains(fp):
        return True
    if distance_to_boundary(fp, config) < d_col:
        return True
    if geo.dist(fp, state.leader.pose.position) < d_col:
        return True
    return False


def step_world(world: WorldState, config: WorldConfig,
               leader_cmd: ControlInput, follower_cmd: ControlInput) -> WorldState:
    """Advance both vehicles one dt. A collided world is frozen and returned unchanged."""
    if world.collided:
        return world
    leader = step_vehicle(world.leader, leader_cmd, config.dt, config)
    follower = step_vehicle(world.follower, follower_cmd, config.dt, config)
    nxt = WorldState(
        time=world.time + config.dt,
        leader=leader,
        follower=follower,
        leader_mode=world.leader_mode,
        collided=False,
    )
    return dataclasses.replace(nxt, collided=check_collision(nxt, config))


def region_waypoints(config: WorldConfig, region: str) -> list[Waypoint]:
    """Inspection waypoints offset outward by standoff from every edge labeled `region`.

    Waypoints run along each matching edge in polygon order, at most
    waypoint_spacing apart, heading facing the hull.
    """
    if region == WHOLE_HULL:
        idxs = list(range(len(config.hull)))
    else:
        idxs = [i for i, lbl in enumerate(config.edge_labels) if lbl == region]
    if not idxs:
        raise NoSuchRegion(f"no hull edge labeled {region!r}")
    ccw = geo.polygon_signed_area(config.hull) > 0
    out: list[Waypoint] = []
    n = len(config.hull)
    for i in idxs:
        a, b = config.hull[i], config.hull[(i + 1) % n]
        d = geo.unit(geo.sub(b, a))
        normal = (d[1], -d[0]) if ccw else (-d[1], d[0])
        length = geo.dist(a, b)
        segments = max(1, math.ceil(length / config.waypoint_spacing))
        inward = math.atan2(-normal[1], -normal[0])
        for k in range(segments + 1):
            t = k / segments
            p = (
                a[0] + t * (b[0] - a[0]) + config.standoff * normal[0],
                a[1] + t * (b[1] - a[1]) + config.standoff * normal[1],
            )
            out.append(Waypoint(position=p, heading=inward))
    return out


SCENE_SCHEMA = 1


def parse_scene(data: dict) -> WorldConfig:
    if not isinstance(data, dict):
        raise SceneError("scene must be a mapping")
    if data.get("schema") != SCENE_SCHEMA:
        raise SceneError(f"unsupported scene schema {data.get('schema')!r}")
    try:
        hull = tuple((float(x), float(y)) for x, y in data["hull"])
        labels = tuple(str(s) for s in data["edge_labels"])
        obstacles = tuple(
            Circle(center=(float(o["center"][0]), float(o["center"][1])),
                   radius=float(o["radius"]))
            for o in data.get("obstacles", [])
        )
        poi = (float(data["poi"][0]), float(data["poi"][1]))
        bx = data["bounds"]
        bounds = Bounds(float(bx[0]), float(bx[1]), float(bx[2]), float(bx[3]))
        patrol = tuple((float(x), float(y)) for x, y in data.get("patrol", []))
        cfg = WorldConfig(
            hull=hull,
            edge_labels=labels,
            obstacles=obstacles,
            poi=poi,
            bounds=bounds,
            dt=float(data.get("dt", 0.1)),
            v_max=float(data.get("v_max", 1.0)),
            omega_max=float(data.get("omega_max", 1.0)),
            standoff=float(data.get("standoff", 3.0)),
            waypoint_spacing=float(data.get("waypoint_spacing", 5.0)),
            d_col=float(data.get("d_col", 0.5)),
            patrol=patrol,
        )
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise SceneError(f"bad scene file: {e!r}") from e
    cfg.validate()
    return cfg


def scene_to_dict(config: WorldConfig) -> dict:
    return {
        "schema": SCENE_SCHEMA,
        "hull": [[x, y] for x, y in config.hull],
        "edge_labels": list(config.edge_labels),
        "obstacles": [
            {"center": [c.center[0], c.center[1]], "radius": c.radius}
            for c in config.obstacles
        ],
        "poi": [config.poi[0], config.poi[1]],
        "bounds": [config.bounds.xmin, config.bounds.ymin,
                   config.bounds.xmax, config.bounds.ymax],
        "dt": config.dt,
        "v_max": config.v_max,
        "omega_max": config.omega_max,
        "standoff": config.standoff,
        "waypoint_spacing": config.waypoint_spacing,
        "d_col": config.d_col,
        "patrol": [[x, y] for x, y in config.patrol],
    }


def load_scene(path) -> WorldConfig:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise SceneError(f"cannot read scene file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise SceneError(f"scene file {path} is not valid YAML: {e}") from e
    return parse_scene(data)
