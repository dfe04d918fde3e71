"""Fixed-rate simulation session: command routing, BT ticking, recording.

One session owns all mutable state and runs at dt / realtime_factor. Network
handlers only enqueue inbound frames; the loop drains them between steps and
answers every one with exactly one ack or err.
"""

from __future__ import annotations

import dataclasses
import math
import time as wallclock
from dataclasses import dataclass, field

import numpy as np

from .. import bt, comms, intent, sonar as sonar_mod
from ..guidance import (ControllerGains, FormationSpec, FormationTarget,
                        baseline_controller)
from ..metrics import Event, MetricsAccumulator, StepSample, accumulate, peek
from ..rl.env import (EnvParams, RewardWeights, advance, encode_observation,
                      sample_start, ScriptedPatrol)
from ..rl.policy import (BaselineFollowerController, PolicyController,
                         RandomController, Policy)
from ..rl.env import EnvView
from ..world import (MANUAL, ControlInput, WorldConfig, WorldState,
                     load_scene, scene_to_dict, NoSuchRegion)
from . import protocol, record

TELEOP_STALE_AFTER = 1.0
SNAPSHOT_EVERY_DEFAULT = 2
GOTO_ARRIVE_TOL = 0.5
INSPECT_DWELL = 5.0


class SceneLoadError(Exception):
    pass


@dataclass
class SessionConfig:
    scene_path: str
    policy: str = "baseline"  # baseline | random | path to weights
    channel: comms.ChannelConfig = field(default_factory=comms.ChannelConfig)
    sonar: sonar_mod.SonarConfig = field(default_factory=sonar_mod.SonarConfig)
    formation: FormationSpec = field(default_factory=FormationSpec)
    weights: RewardWeights = field(default_factory=RewardWeights)
    seed: int = 0
    realtime_factor: float = 0.0
    host: str = "127.0.0.1"
    port: int = 8765
    record_path: str | None = None
    max_steps: int | None = None
    snapshot_every: int = SNAPSHOT_EVERY_DEFAULT
    d_viol: float = 1.0
    autostart: str | None = None
    llm: intent.LlmConfig = field(default_factory=intent.LlmConfig)


class NullHub:
    """Headless stand-in for the network layer."""

    def poll(self) -> list:
        return []

    def send(self, client_id, frame: dict) -> None:
        pass

    def broadcast(self, frame: dict) -> None:
        pass


class Session:
    def __init__(self, config: SessionConfig, hub=None):
        self.config = config
        try:
            world_cfg = load_scene(config.scene_path)
        except Exception as e:
            raise SceneLoadError(str(e)) from e
        config.channel.validate_against_dt(world_cfg.dt)
        self.params = EnvParams(
            world=world_cfg, channel=config.channel, sonar=config.sonar,
            formation=config.formation, weights=config.weights,
            max_steps=config.max_steps or 10**9)
        self.hub = hub or NullHub()
        self.controller = make_controller(config.policy, world_cfg)
        self.scene_dict = scene_to_dict(world_cfg)
        rng = np.random.default_rng(config.seed)
        patrol = ScriptedPatrol(world_cfg.patrol or [world_cfg.poi], world_cfg)
        self.world: WorldState = sample_start(self.params, patrol, rng)
        self.channel = comms.ChannelState.fresh(config.channel)
        self.target: FormationTarget | None = None
        self.metrics_acc = MetricsAccumulator(d_viol=config.d_viol)
        self.events: list[Event] = []
        self.paused = False
        self.steps = 0
        self.running = True
        # teleop: command plus the sim time it arrived; stale commands decay to zero
        self.teleop_cmd = ControlInput()
        self.teleop_time = -math.inf
        self.teleop_owner = None
        # mission executive
        self.mission: bt.Mission | None = None
        self.blackboard: bt.Blackboard | None = None
        self.bindings: bt.Bindings = {}
        self.bt_leader_cmd = ControlInput()
        self.bt_paused = False
        self.mission_done = False
        self._pending_directives: dict = {}
        self.recorder: record.RecordWriter | None = None
        if config.record_path:
            header = record.params_to_header(
                self.params, config.seed, config.policy, config.d_viol, self.world)
            self.recorder = record.RecordWriter(config.record_path, header)
        if config.autostart:
            result = intent.parse_command(config.autostart, config.llm)
            if not result.ok:
                raise SceneLoadError(
                    f"autostart command failed to parse: {result.error}")
            self._apply_effect(intent.command_to_mission(
                result.command, self.params.world))

    # --- mission leaves -------------------------------------------------------

    def _drive_leader_to(self, wp) -> bt.NodeStatus:
        if self.world.leader_mode == MANUAL:
            return bt.RUNNING
        leader = self.world.leader
        if (abs(wp.position[0] - leader.pose.x) ** 2
                + abs(wp.position[1] - leader.pose.y) ** 2) <= GOTO_ARRIVE_TOL ** 2:
            self.bt_leader_cmd = ControlInput()
            return bt.SUCCESS
        self.bt_leader_cmd = baseline_controller(
            leader, FormationTarget(wp.position, wp.heading), self.params.world,
            ControllerGains(arrive_tol=GOTO_ARRIVE_TOL))
        return bt.RUNNING

    def _make_bindings(self, mission: bt.Mission) -> bt.Bindings:
        world_cfg = self.params.world
        sonar_cfg = self.config.sonar

        def abort_requested(bb: bt.Blackboard):
            return bt.SUCCESS if bb.get(bt.ABORT_FLAG) else bt.FAILURE

        def execute_abort(bb: bt.Blackboard):
            self.bt_leader_cmd = ControlInput()
            if not bb.get("mission.abort_done"):
                bb.set("mission.abort_done", True)
                self._event("mission", "mission aborted")
            return bt.SUCCESS

        def transit_to_start(bb: bt.Blackboard):
            return self._drive_leader_to(mission.waypoints[0])

        def report_complete(bb: bt.Blackboard):
            if not bb.get("mission.report_done"):
                bb.set("mission.report_done", True)
                self._event("mission", f"{mission.template} complete")
                self.hub.broadcast(protocol.summary(self._render_summary()))
            return bt.SUCCESS

        bindings: bt.Bindings = {
            bt.LEAF_ABORT_REQUESTED: abort_requested,
            bt.LEAF_EXECUTE_ABORT: execute_abort,
            bt.LEAF_TRANSIT_TO_START: transit_to_start,
            bt.LEAF_REPORT_COMPLETE: report_complete,
        }

        def make_goto(i: int, wp):
            def goto(bb: bt.Blackboard):
                return self._drive_leader_to(wp)
            return goto

        def make_inspect(i: int, wp):
            seg_point = (wp.position[0] + world_cfg.standoff * math.cos(wp.heading),
                         wp.position[1] + world_cfg.standoff * math.sin(wp.heading))
            key = f"mission.dwell.{i}"

            def inspect(bb: bt.Blackboard):
                dwell = bb.get(key)
                if dwell >= INSPECT_DWELL:
                    return bt.SUCCESS
                report = sonar_mod.target_visible(
                    self.world.leader, seg_point, world_cfg, sonar_cfg)
                if report.visible:
                    bb.set(key, dwell + world_cfg.dt)
                if self.world.leader_mode != MANUAL:
                    self.bt_leader_cmd = baseline_controller(
                        self.world.leader, FormationTarget(wp.position, wp.heading),
                        world_cfg, ControllerGains(arrive_tol=GOTO_ARRIVE_TOL))
                return bt.SUCCESS if bb.get(key) >= INSPECT_DWELL else bt.RUNNING
            return inspect

        for i, wp in enumerate(mission.waypoints):
            bindings[bt.goto_leaf_name(i)] = make_goto(i, wp)
            bindings[bt.inspect_leaf_name(i)] = make_inspect(i, wp)
        return bindings

    def _start_mission(self, template: str, params: dict) -> None:
        mission = bt.instantiate_mission(template, params)
        self.mission = mission
        self.blackboard = bt.Blackboard({
            bt.ABORT_FLAG: False,
            "mission.abort_done": False,
            "mission.report_done": False,
        })
        for i in range(len(mission.waypoints)):
            self.blackboard.set(f"mission.dwell.{i}", 0.0)
        self.bindings = self._make_bindings(mission)
        self.bt_leader_cmd = ControlInput()
        self.bt_paused = False
        self.mission_done = False
        self._event("mission", f"{template} started "
                               f"({len(mission.waypoints)} waypoints)")

    def _apply_effect(self, effect: intent.CommandEffect) -> dict | None:
        """Apply a grounded command; returns an extra ack payload."""
        if effect.kind == "start_mission":
            self._start_mission(effect.template, effect.mission_params)
            return {"mission": effect.template,
                    "waypoints": len(self.mission.waypoints)}
        if effect.kind == "abort":
            if self.blackboard is None:
                raise protocol.FrameError(protocol.NO_MISSION, "no mission to abort")
            self.blackboard.set(bt.ABORT_FLAG, True)
            self.bt_paused = False
            self._event("mission", "abort requested")
            return None
        if effect.kind == "hold":
            self.bt_paused = True
            self.bt_leader_cmd = ControlInput()
            self._event("mission", "hold: BT ticking paused")
            return None
        if effect.kind == "report":
            self.hub.broadcast(protocol.summary(self._render_summary()))
            return None
        if effect.kind == "set_formation":
            self._set_formation(effect.formation_params)
            return None
        raise ValueError(f"unhandled effect {effect.kind!r}")

    def _set_formation(self, params: dict) -> None:
        spec = self.params.formation
        radius = float(params.get("radius", spec.radius))
        offset = float(params.get("offset", spec.offset))
        new_spec = FormationSpec(radius=radius, offset=offset)
        self.params = dataclasses.replace(self.params, formation=new_spec)
        self._pending_directives["set_formation"] = [radius, new_spec.offset]
        self._event("formation", f"radius {radius:.2f} m, offset {new_spec.offset:.3f} rad")

    def _render_summary(self) -> str:
        m = peek(self.metrics_acc)
        if m is None:
            return "No telemetry yet."
        return intent.summarize_feedback(m, self.events, self.config.llm)

    def _event(self, kind: str, text: str) -> None:
        self.events.append(Event(time=self.world.time, kind=kind, text=text))

    # --- inbound commands -----------------------------------------------------

    def handle_frame(self, client_id, frame: dict) -> None:
        ref = frame.get("ref") if isinstance(frame, dict) else None
        ref = ref if isinstance(ref, int) else None
        try:
            frame = protocol.validate_client_frame(frame)
            payload = self._dispatch(client_id, frame)
        except protocol.FrameError as e:
            self.hub.send(client_id, protocol.err(ref, e.code, e.detail))
            return
        except Exception as e:  # a client must never take the session down
            self.hub.send(client_id, protocol.err(ref, "Internal", repr(e)))
            return
        self.hub.send(client_id, protocol.ack(frame["ref"], payload))

    def _dispatch(self, client_id, frame: dict) -> dict | None:
        kind = frame["type"]
        if kind == "teleop":
            if self.world.leader_mode != MANUAL:
                raise protocol.FrameError(protocol.WRONG_MODE,
                                          "teleop requires Manual mode")
            if self.teleop_owner is None:
                self.teleop_owner = client_id
            if self.teleop_owner != client_id:
                raise protocol.FrameError(protocol.NOT_CONTROLLER,
                                          "another client holds the teleop role")
            self.teleop_cmd = ControlInput(float(frame["surge"]),
                                           float(frame["yaw_rate"]))
            self.teleop_time = self.world.time
            return None
        if kind == "set_mode":
            mode = frame["mode"]
            if mode != self.world.leader_mode:
                self.world = dataclasses.replace(self.world, leader_mode=mode)
                self._pending_directives["set_mode"] = mode
                self._event("mode", f"leader mode -> {mode}")
            return None
        if kind == "nl_command":
            result = intent.parse_command(frame["text"], self.config.llm)
            if not result.ok:
                raise protocol.FrameError(result.error, result.detail)
            try:
                effect = intent.command_to_mission(result.command, self.params.world)
                payload = self._apply_effect(effect)
            except NoSuchRegion as e:
                raise protocol.FrameError(protocol.NO_SUCH_REGION, str(e))
            out = {"command": result.command.to_dict(), "source": result.source}
            if result.detail:
                out["detail"] = result.detail
            if payload:
                out.update(payload)
            return out
        if kind == "bt_override":
            if self.mission is None:
                raise protocol.FrameError(protocol.NO_MISSION, "no active mission tree")
            forced = frame.get("forced")
            status = bt.NodeStatus(forced) if forced is not None else None
            try:
                bt.override_node(self.mission.tree, frame["node_id"], status)
            except bt.NoSuchNode:
                raise protocol.FrameError(protocol.NO_SUCH_NODE,
                                          f"no node {frame['node_id']}")
            return None
        if kind == "set_formation":
            self._set_formation({k: frame[k] for k in ("radius", "offset")
                                 if k in frame})
            return None
        if kind == "control":
            action = frame["action"]
            if action == "Pause":
                self.paused = True
            elif action == "Resume":
                self.paused = False
            elif action == "Reset":
                self._reset()
            return None
        raise protocol.FrameError(protocol.BAD_FRAME, f"unhandled type {kind!r}")

    def _reset(self) -> None:
        if self.recorder is not None:
            self.recorder.close(peek(self.metrics_acc))
            self.recorder = None
        rng = np.random.default_rng(self.config.seed)
        patrol = ScriptedPatrol(self.params.world.patrol or [self.params.world.poi],
                                self.params.world)
        self.world = sample_start(self.params, patrol, rng)
        self.channel = comms.ChannelState.fresh(self.config.channel)
        self.target = None
        self.metrics_acc = MetricsAccumulator(d_viol=self.config.d_viol)
        self.events = []
        self.steps = 0
        self.mission = None
        self.blackboard = None
        self.bindings = {}
        self.bt_leader_cmd = ControlInput()
        self.mission_done = False
        self._event("session", "reset")

    # --- stepping ---------------------------------------------------------------

    def _leader_command(self) -> ControlInput:
        if self.world.leader_mode == MANUAL:
            if self.world.time - self.teleop_time > TELEOP_STALE_AFTER:
                return ControlInput()
            return self.teleop_cmd
        return self.bt_leader_cmd

    def _follower_command(self, obs) -> ControlInput:
        view = EnvView(follower=self.world.follower, target=self.target,
                       world=self.params.world)
        return self.controller.command(obs, view)

    def step_once(self) -> None:
        """One dt of simulation: route commands, advance, tick the BT, record."""
        if self.world.collided:
            return
        leader_cmd = self._leader_command()
        obs = encode_observation(self.world, self.channel, self.params, self.target)
        follower_cmd = self._follower_command(obs)
        directives = self._pending_directives
        self._pending_directives = {}
        self.world, _obs2, self.target, _r, info = advance(
            self.world, self.channel, self.params, self.target,
            leader_cmd, follower_cmd)
        self.steps += 1
        sample = record.sample_to_dict(info)
        accumulate(self.metrics_acc, StepSample(
            time=info["time"], poi_visible=sample["visible"],
            formation_deviation=sample["deviation"],
            min_clearance=sample["min_clearance"], collided=sample["collided"]))
        if info["collided"]:
            self._event("safety", "follower collision; world frozen")
        if self.recorder is not None:
            self.recorder.write_step(info["time"], leader_cmd, follower_cmd,
                                     info["delivered"], self.world, sample,
                                     directives)
            if self.world.collided:
                self.recorder.close(peek(self.metrics_acc))
                self.recorder = None
        self._tick_mission()

    def _tick_mission(self) -> None:
        if self.mission is None or self.bt_paused or self.mission_done:
            return
        self.bt_leader_cmd = ControlInput()
        status = bt.tick(self.mission.tree, self.blackboard, self.bindings)
        if status is not bt.RUNNING:
            self.mission_done = True
            self.bt_leader_cmd = ControlInput()
            self._event("mission", f"tree finished: {status.value}")

    # --- snapshots ----------------------------------------------------------------

    def snapshot(self) -> dict:
        w = self.world
        lk = comms.last_known(self.channel, w.time)
        scan = sonar_mod.scan(w.follower, self.params.world, self.config.sonar)
        vis = sonar_mod.poi_visible(w.follower, self.params.world, self.config.sonar)
        m = peek(self.metrics_acc)
        return {
            "type": "snapshot",
            "schema": protocol.PROTOCOL_SCHEMA,
            "time": w.time,
            "paused": self.paused,
            "leader": {**record.vehicle_to_dict(w.leader), "mode": w.leader_mode},
            "follower": record.vehicle_to_dict(w.follower),
            "collided": w.collided,
            "last_known": None if lk is None else {
                "pose": record.pose_to_list(lk[0]), "age": lk[1]},
            "formation_target": None if self.target is None else {
                "position": list(self.target.position),
                "heading": self.target.heading},
            "formation": {"radius": self.params.formation.radius,
                          "offset": self.params.formation.offset},
            "scan": {"bearings": list(scan.bearings), "ranges": list(scan.ranges)},
            "poi_visibility": {"visible": vis.visible, "bearing": vis.bearing,
                               "range": vis.range, "reason": vis.reason},
            "bt": None if self.mission is None else bt.snapshot_tree(self.mission.tree),
            "metrics": None if m is None else m.to_dict(),
        }

    # --- loop ---------------------------------------------------------------------

    def drain_commands(self) -> None:
        for client_id, frame in self.hub.poll():
            if isinstance(frame, dict) and frame.get("type") == "_disconnect":
                if self.teleop_owner == client_id:
                    self.teleop_owner = None
                continue
            self.handle_frame(client_id, frame)

    def run(self) -> None:
        cfg = self.config
        dt = self.params.world.dt
        next_deadline = wallclock.monotonic()
        while self.running:
            self.drain_commands()
            if not self.paused:
                self.step_once()
                if self.steps % cfg.snapshot_every == 0:
                    self.hub.broadcast(self.snapshot())
            if cfg.max_steps is not None and self.steps >= cfg.max_steps:
                break
            if cfg.realtime_factor > 0:
                next_deadline += dt / cfg.realtime_factor
                delay = next_deadline - wallclock.monotonic()
                if delay > 0:
                    wallclock.sleep(delay)
            elif self.paused:
                wallclock.sleep(0.005)
        self.close()

    def close(self) -> None:
        self.running = False
        if self.recorder is not None:
            self.recorder.close(peek(self.metrics_acc))
            self.recorder = None


def make_controller(policy: str, world_cfg: WorldConfig):
    if policy == "baseline":
        return BaselineFollowerController()
    if policy == "random":
        return RandomController(world_cfg)
    return PolicyController(Policy.load(policy), world_cfg)
