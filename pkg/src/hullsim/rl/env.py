"""Follower RL environment: observation encoding, reward, episode stepping.

The observation is built strictly from what the follower can know: its own
state, the sonar, and the last delivered leader pose. The leader is driven by
a pluggable command source (scripted patrol during training).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .. import comms, geometry as geo, sonar
from ..guidance import (ControllerGains, DegenerateGeometry, FormationSpec,
                        FormationTarget, baseline_controller, formation_target)
from ..world import (AUTONOMOUS, ControlInput, Pose2D, VehicleState, WorldConfig,
                     WorldState, distance_to_boundary, step_world)

OBS_DIM = 9
N_ACTIONS = 9


class EpisodeFinished(Exception):
    """step() called on a finished episode."""


@dataclass(frozen=True)
class RewardWeights:
    w_form: float = 0.5
    w_vis: float = 1.0
    w_prox: float = 1.0
    d_safe: float = 2.0
    collision_penalty: float = 50.0

    def __post_init__(self):
        if min(self.w_form, self.w_vis, self.w_prox) < 0 or self.collision_penalty <= 0:
            raise ValueError("weights must be >= 0 and collision_penalty > 0")


@dataclass(frozen=True)
class EnvParams:
    world: WorldConfig
    channel: comms.ChannelConfig = comms.ChannelConfig()
    sonar: sonar.SonarConfig = sonar.SonarConfig()
    formation: FormationSpec = FormationSpec()
    weights: RewardWeights = RewardWeights()
    d_cap: float = 10.0
    max_steps: int = 600

    def __post_init__(self):
        if self.weights.d_safe <= self.world.d_col:
            raise ValueError("d_safe must exceed d_col")
        if self.d_cap < self.weights.d_safe:
            raise ValueError("d_cap must not cut into the proximity-penalty zone")
        self.channel.validate_against_dt(self.world.dt)


def action_inputs(world: WorldConfig) -> list[ControlInput]:
    """The 9 discrete actions: {0, v_max/2, v_max} x {-w_max, 0, +w_max}."""
    out = []
    for v in (0.0, world.v_max / 2.0, world.v_max):
        for w in (-world.omega_max, 0.0, world.omega_max):
            out.append(ControlInput(surge_cmd=v, yaw_rate_cmd=w))
    return out


def resolve_formation_target(world: WorldState, channel: comms.ChannelState,
                             poi, spec: FormationSpec,
                             prev: FormationTarget | None) -> FormationTarget | None:
    """Formation target from the last-known leader pose; holds the previous
    target on degenerate geometry; None until anything is delivered."""
    lk = comms.last_known(channel, world.time)
    if lk is None:
        return prev
    pose, _age = lk
    try:
        return formation_target(pose, poi, spec)
    except DegenerateGeometry:
        return prev


def _to_body(v, heading: float):
    return geo.rotate(v, -heading)


def encode_observation(world: WorldState, channel: comms.ChannelState,
                       params: EnvParams,
                       prev_target: FormationTarget | None = None) -> np.ndarray:
    """9-vector of follower-knowable quantities (body frame where applicable)."""
    f = world.follower
    pos, heading = f.pose.position, f.pose.heading
    target = resolve_formation_target(world, channel, params.world.poi,
                                      params.formation, prev_target)
    if target is None:
        t_dx, t_dy = 0.0, 0.0
    else:
        t_dx, t_dy = _to_body(geo.sub(target.position, pos), heading)
    to_poi = geo.sub(params.world.poi, pos)
    poi_bearing = geo.wrap_angle(math.atan2(to_poi[1], to_poi[0]) - heading)
    poi_range = geo.norm(to_poi)
    lk = comms.last_known(channel, world.time)
    if lk is None:
        l_dx, l_dy = 0.0, 0.0
    else:
        l_dx, l_dy = _to_body(geo.sub(lk[0].position, pos), heading)
    d_bound = min(distance_to_boundary(pos, params.world), params.d_cap)
    vis = sonar.poi_visible(f, params.world, params.sonar).visible
    return np.array([t_dx, t_dy, poi_bearing, poi_range, l_dx, l_dy,
                     d_bound, f.surge, 1.0 if vis else 0.0], dtype=np.float64)


# fixed per-feature scaling applied in front of the network
OBS_SCALE = np.array([0.1, 0.1, 1.0 / math.pi, 0.05, 0.1, 0.1, 0.1, 1.0, 1.0])


def reward(world: WorldState, obs: np.ndarray, weights: RewardWeights) -> float:
    """Non-positive shaping: formation distance, lost visibility, proximity;
    a collision adds the terminal penalty."""
    d_form = math.hypot(obs[0], obs[1])
    visible = obs[8] > 0.5
    d_lead = geo.dist(world.follower.pose.position, world.leader.pose.position)
    d_min = min(float(obs[6]), d_lead)
    r = -weights.w_form * d_form
    r -= weights.w_vis * (0.0 if visible else 1.0)
    r -= weights.w_prox * max(0.0, (weights.d_safe - d_min) / weights.d_safe)
    if world.collided:
        r -= weights.collision_penalty
    return r


class ScriptedPatrol:
    """Leader command source for training: inspect-style patrol that dwells at
    each waypoint, then transits to the next (ping-pong along the route)."""

    def __init__(self, route, world: WorldConfig,
                 gains: ControllerGains = ControllerGains(arrive_tol=0.6),
                 dwell_steps: int = 450):
        if not route:
            raise ValueError("patrol route is empty")
        self.route = list(route)
        self.world = world
        self.gains = gains
        self.dwell_steps = dwell_steps
        self.idx = 0
        self.direction = 1
        self._dwell = 0

    def reset(self, rng: np.random.Generator) -> None:
        self.idx = int(rng.integers(len(self.route)))
        self.direction = 1 if rng.random() < 0.5 else -1
        self._dwell = 0

    def start_pose(self, rng: np.random.Generator) -> Pose2D:
        self.reset(rng)
        p = self.route[self.idx]
        jitter = rng.uniform(-0.5, 0.5, size=2)
        nxt = self.route[min(max(self.idx + self.direction, 0), len(self.route) - 1)]
        heading = math.atan2(nxt[1] - p[1], nxt[0] - p[0]) if nxt != p else 0.0
        return Pose2D(p[0] + jitter[0], p[1] + jitter[1], heading)

    def command(self, world: WorldState) -> ControlInput:
        pos = world.leader.pose.position
        wp = self.route[self.idx]
        if geo.dist(pos, wp) <= self.gains.arrive_tol:
            if self._dwell < self.dwell_steps:
                self._dwell += 1
                return ControlInput()
            nxt = self.idx + self.direction
            if nxt < 0 or nxt >= len(self.route):
                self.direction = -self.direction
                nxt = self.idx + self.direction
            self.idx = nxt
            self._dwell = 0
            wp = self.route[self.idx]
        heading = math.atan2(wp[1] - pos[1], wp[0] - pos[0])
        return baseline_controller(world.leader, FormationTarget(wp, heading),
                                   self.world, self.gains)


def sample_start(params: EnvParams, patrol: ScriptedPatrol,
                 rng: np.random.Generator) -> WorldState:
    """Seeded randomized episode start: leader on the patrol, follower deployed
    in a clear annulus sector around its formation station, uniform heading."""
    w = params.world
    leader = VehicleState(pose=patrol.start_pose(rng))
    poi = w.poi
    try:
        station = formation_target(leader.pose, poi, params.formation).position
        sector_mid = math.atan2(station[1] - poi[1], station[0] - poi[0])
    except DegenerateGeometry:
        sector_mid = 0.0
    for _ in range(1000):
        r = rng.uniform(5.0, 7.0)
        a = sector_mid + rng.uniform(-1.2, 1.2)
        p = (poi[0] + r * math.cos(a), poi[1] + r * math.sin(a))
        if not w.bounds.contains(p):
            continue
        if geo.point_in_polygon(p, w.hull):
            continue
        if distance_to_boundary(p, w) < 1.5:
            continue
        if geo.dist(p, leader.pose.position) < 2.0:
            continue
        heading = rng.uniform(-math.pi, math.pi)
        follower = VehicleState(pose=Pose2D(p[0], p[1], heading))
        return WorldState(time=0.0, leader=leader, follower=follower,
                          leader_mode=AUTONOMOUS, collided=False)
    raise RuntimeError("could not sample a clear follower start")


def advance(world: WorldState, channel: comms.ChannelState, params: EnvParams,
            target: FormationTarget | None,
            leader_cmd: ControlInput, follower_cmd: ControlInput):
    """One dt of the shared pipeline: step both vehicles, run the channel,
    re-encode the observation. The session loop and record replay use this
    exact path so trajectories reproduce bit-exactly."""
    w2 = step_world(world, params.world, leader_cmd, follower_cmd)
    comms.broadcast(channel, params.channel, w2.time, w2.leader.pose)
    _, delivered = comms.deliver(channel, params.channel, w2.time)
    obs = encode_observation(w2, channel, params, target)
    t2 = resolve_formation_target(w2, channel, params.world.poi,
                                  params.formation, target)
    r = reward(w2, obs, params.weights)
    fp = w2.follower.pose.position
    d_lead = geo.dist(fp, w2.leader.pose.position)
    info = {
        "time": w2.time,
        "visible": bool(obs[8] > 0.5),
        "deviation": math.hypot(obs[0], obs[1]),
        "min_clearance": min(distance_to_boundary(fp, params.world), d_lead),
        "collided": w2.collided,
        "delivered": delivered,
        "target": t2,
    }
    return w2, obs, t2, r, info


class FollowerEnv:
    """Deterministic episodic environment around the world/comms/sonar stack."""

    def __init__(self, params: EnvParams):
        self.params = params
        self.actions = action_inputs(params.world)
        self.patrol = ScriptedPatrol(
            params.world.patrol or [params.world.poi], params.world)
        self.world: WorldState | None = None
        self.channel: comms.ChannelState | None = None
        self.target: FormationTarget | None = None
        self.steps = 0
        self.done = True

    def reset(self, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        self.world = sample_start(self.params, self.patrol, rng)
        self.channel = comms.ChannelState(
            rng=random.Random(f"{self.params.channel.seed}:{seed}"))
        self.target = None
        self.steps = 0
        self.done = False
        return encode_observation(self.world, self.channel, self.params, self.target)

    def step(self, action: int):
        if not 0 <= action < N_ACTIONS:
            raise ValueError(f"action index {action} out of range")
        return self.step_command(self.actions[action])

    def step_command(self, follower_cmd: ControlInput):
        """Advance one dt with an explicit follower command (used by the
        baseline comparator); step() is the discrete-action wrapper."""
        if self.done:
            raise EpisodeFinished
        leader_cmd = self.patrol.command(self.world)
        self.world, obs, self.target, r, info = advance(
            self.world, self.channel, self.params, self.target,
            leader_cmd, follower_cmd)
        self.steps += 1
        self.done = self.world.collided or self.steps >= self.params.max_steps
        return obs, r, self.done, info

    def view(self):
        """Follower-knowable view for non-policy controllers."""
        return EnvView(follower=self.world.follower, target=self.target,
                       world=self.params.world)


@dataclass(frozen=True)
class EnvView:
    follower: VehicleState
    target: FormationTarget | None
    world: WorldConfig
