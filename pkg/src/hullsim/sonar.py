"""Forward-facing multibeam sonar: beam ray-casting and PoI visibility.

The beam fan serves obstacle awareness and display; PoI visibility is a
separate geometric predicate so it cannot alias when the PoI falls between
beams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import geometry as geo
from .geometry import Point
from .world import VehicleState, WorldConfig

VISIBLE = "Visible"
OUT_OF_FOV = "OutOfFov"
OUT_OF_RANGE = "OutOfRange"
OCCLUDED = "Occluded"

# intersections this close to the PoI endpoint do not occlude (the PoI sits on the hull)
POI_CONTACT_EPS = 1e-6


@dataclass(frozen=True)
class SonarConfig:
    fov: float = 2.0 * math.pi / 3.0
    n_beams: int = 64
    max_range: float = 20.0

    def __post_init__(self):
        if not (0.0 < self.fov <= 2.0 * math.pi):
            raise ValueError(f"fov must be in (0, 2pi], got {self.fov}")
        if self.n_beams < 2:
            raise ValueError("need at least 2 beams")
        if self.max_range <= 0:
            raise ValueError("max_range must be > 0")

    def bearings(self) -> list[float]:
        half = 0.5 * self.fov
        step = self.fov / (self.n_beams - 1)
        return [-half + i * step for i in range(self.n_beams)]


@dataclass(frozen=True)
class SonarScan:
    ranges: tuple[float, ...]
    bearings: tuple[float, ...]


@dataclass(frozen=True)
class VisibilityReport:
    visible: bool
    bearing: float
    range: float
    reason: str


def ray_cast(origin: Point, bearing_world: float, config: SonarConfig, world: WorldConfig) -> float:
    """Distance to the nearest hull edge or obstacle along the ray, capped at max_range."""
    d = (math.cos(bearing_world), math.sin(bearing_world))
    best = config.max_range
    n = len(world.hull)
    for i in range(n):
        t = geo.ray_segment_intersection(origin, d, world.hull[i], world.hull[(i + 1) % n])
        if t is not None and t < best:
            best = t
    for c in world.obstacles:
        t = geo.ray_circle_intersection(origin, d, c.center, c.radius)
        if t is not None and t < best:
            best = t
    return best


def scan(vehicle: VehicleState, world: WorldConfig, config: SonarConfig) -> SonarScan:
    pose = vehicle.pose
    bearings = config.bearings()
    ranges = tuple(
        ray_cast(pose.position, geo.wrap_angle(pose.heading + b), config, world)
        for b in bearings
    )
    return SonarScan(ranges=ranges, bearings=tuple(bearings))


def target_visible(vehicle: VehicleState, target: Point, world: WorldConfig,
                   config: SonarConfig) -> VisibilityReport:
    """Geometric visibility of an arbitrary hull point: FoV, then range, then occlusion."""
    pose = vehicle.pose
    to_t = geo.sub(target, pose.position)
    rng = geo.norm(to_t)
    bearing = geo.wrap_angle(math.atan2(to_t[1], to_t[0]) - pose.heading)
    if abs(bearing) > 0.5 * config.fov:
        return VisibilityReport(False, bearing, rng, OUT_OF_FOV)
    if rng > config.max_range:
        return VisibilityReport(False, bearing, rng, OUT_OF_RANGE)
    if _segment_occluded(pose.position, target, world):
        return VisibilityReport(False, bearing, rng, OCCLUDED)
    return VisibilityReport(True, bearing, rng, VISIBLE)


def poi_visible(vehicle: VehicleState, world: WorldConfig, config: SonarConfig) -> VisibilityReport:
    return target_visible(vehicle, world.poi, world, config)


def _segment_occluded(p0: Point, p1: Point, world: WorldConfig) -> bool:
    L = geo.dist(p0, p1)
    if L <= POI_CONTACT_EPS:
        return False
    t_max = L - POI_CONTACT_EPS
    n = len(world.hull)
    for i in range(n):
        if geo.segment_hits_segment(p0, p1, world.hull[i], world.hull[(i + 1) % n],
                                    1e-9, t_max):
            return True
    for c in world.obstacles:
        if geo.segment_hits_circle(p0, p1, c.center, c.radius, 1e-9, t_max):
            return True
    return False
