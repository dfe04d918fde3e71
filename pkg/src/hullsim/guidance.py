"""PoI-centric formation geometry and the scripted baseline follower.

The formation target sits on a circle of fixed radius around the PoI, at a
fixed angular offset from the PoI-to-leader bearing, facing the PoI. The
baseline controller is a pure-pursuit comparator for the learned policy and
the leader's waypoint driver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import geometry as geo
from .geometry import Point
from .world import ControlInput, Pose2D, VehicleState, WorldConfig, nearest_boundary_point


class DegenerateGeometry(Exception):
    """Leader is too close to the PoI for a bearing to be meaningful."""


@dataclass(frozen=True)
class FormationSpec:
    radius: float = 6.0
    offset: float = math.pi / 3.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("formation radius must be > 0")
        object.__setattr__(self, "offset", geo.wrap_angle(self.offset))


@dataclass(frozen=True)
class FormationTarget:
    position: Point
    heading: float


EPS_DEGENERATE = 0.1


def formation_target(leader_pose: Pose2D, poi: Point, spec: FormationSpec,
                     eps_deg: float = EPS_DEGENERATE) -> FormationTarget:
    """Target pose on the PoI circle, offset from the leader's PoI bearing, facing the PoI."""
    rel = geo.sub(leader_pose.position, poi)
    if geo.norm(rel) <= eps_deg:
        raise DegenerateGeometry(
            f"leader within {eps_deg} m of the PoI, bearing undefined"
        )
    alpha = math.atan2(rel[1], rel[0]) + spec.offset
    position = (poi[0] + spec.radius * math.cos(alpha),
                poi[1] + spec.radius * math.sin(alpha))
    heading = math.atan2(poi[1] - position[1], poi[0] - position[0])
    return FormationTarget(position=position, heading=heading)


@dataclass(frozen=True)
class ControllerGains:
    k_surge: float = 1.0
    k_yaw: float = 2.0
    arrive_tol: float = 0.4
    hold_radius: float = 1.0
    align_band: float = 0.35
    d_safe: float = 2.0
    k_avoid: float = 1.5


def baseline_controller(follower: VehicleState, target: FormationTarget,
                        world: WorldConfig, gains: ControllerGains = ControllerGains()) -> ControlInput:
    """Pure pursuit toward the target with a repulsive bias off nearby boundaries.

    Surge is forward-only and collapses to zero when the target is behind; the
    vehicle turns in place. At the target it aligns to the target heading and
    stops. Inside hold_radius an already-aligned follower keeps the target
    heading and only creeps along it, rather than re-entering pursuit: chasing
    sub-meter target shifts sideways would swing the nose (and the sensor
    footprint) away for seconds at a time.
    """
    pose = follower.pose
    to_t = geo.sub(target.position, pose.position)
    d = geo.norm(to_t)
    align_err = geo.wrap_angle(target.heading - pose.heading)
    if d <= gains.arrive_tol:
        return ControlInput(
            surge_cmd=0.0,
            yaw_rate_cmd=_clamp(gains.k_yaw * align_err, world.omega_max))
    if d <= gains.hold_radius and abs(align_err) <= gains.align_band:
        ahead = geo.dot(to_t, (math.cos(pose.heading), math.sin(pose.heading)))
        return ControlInput(
            surge_cmd=min(world.v_max, gains.k_surge * max(0.0, ahead)),
            yaw_rate_cmd=_clamp(gains.k_yaw * align_err, world.omega_max))
    desired = geo.scale(to_t, 1.0 / d)
    d_min, nearest = nearest_boundary_point(pose.position, world)
    if d_min < gains.d_safe and d_min > 0.0:
        away = geo.unit(geo.sub(pose.position, nearest))
        w = gains.k_avoid * (gains.d_safe - d_min) / gains.d_safe
        desired = geo.unit((desired[0] + w * away[0], desired[1] + w * away[1]))
    err = geo.wrap_angle(math.atan2(desired[1], desired[0]) - pose.heading)
    yaw = _clamp(gains.k_yaw * err, world.omega_max)
    surge = min(world.v_max, gains.k_surge * d) * max(0.0, math.cos(err))
    return ControlInput(surge_cmd=surge, yaw_rate_cmd=yaw)


def _clamp(v: float, limit: float) -> float:
    return min(limit, max(-limit, v))
