"""Line-delimited episode records and bit-exact replay verification.

A record is a header (all configs, seed, initial world), one line per step
(commands, delivered message, resulting world state, metrics sample), and a
footer with the episode metrics. Replaying re-simulates from the header with
the logged commands and reports the first diverging step, or "exact".
"""

from __future__ import annotations

import dataclasses
import json
import math

from .. import comms
from ..guidance import FormationSpec
from ..metrics import (EpisodeMetrics, MetricsAccumulator, StepSample,
                       accumulate, finalize)
from ..sonar import SonarConfig
from ..world import (ControlInput, Pose2D, VehicleState, WorldState,
                     parse_scene, scene_to_dict)
from ..rl.env import EnvParams, RewardWeights, advance

RECORD_SCHEMA = 1


class SchemaMismatch(Exception):
    """Record written under an unsupported schema version."""


class CorruptRecord(Exception):
    """Record truncated or structurally broken."""


def pose_to_list(p: Pose2D) -> list:
    return [p.x, p.y, p.heading]


def pose_from_list(v) -> Pose2D:
    return Pose2D(float(v[0]), float(v[1]), float(v[2]))


def vehicle_to_dict(s: VehicleState) -> dict:
    return {"pose": pose_to_list(s.pose), "surge": s.surge, "yaw_rate": s.yaw_rate}


def vehicle_from_dict(d) -> VehicleState:
    return VehicleState(pose=pose_from_list(d["pose"]),
                        surge=float(d["surge"]), yaw_rate=float(d["yaw_rate"]))


def world_to_dict(w: WorldState) -> dict:
    return {
        "time": w.time,
        "leader": vehicle_to_dict(w.leader),
        "follower": vehicle_to_dict(w.follower),
        "mode": w.leader_mode,
        "collided": w.collided,
    }


def world_from_dict(d) -> WorldState:
    return WorldState(
        time=float(d["time"]),
        leader=vehicle_from_dict(d["leader"]),
        follower=vehicle_from_dict(d["follower"]),
        leader_mode=d["mode"],
        collided=bool(d["collided"]),
    )


def cmd_to_list(c: ControlInput) -> list:
    return [c.surge_cmd, c.yaw_rate_cmd]


def cmd_from_list(v) -> ControlInput:
    return ControlInput(float(v[0]), float(v[1]))


def message_to_dict(m: comms.PoseMessage | None) -> dict | None:
    if m is None:
        return None
    return {"seq": m.seq, "sent_at": m.sent_at, "pose": pose_to_list(m.pose)}


def params_to_header(params: EnvParams, seed: int, policy: str, d_viol: float,
                     world0: WorldState) -> dict:
    return {
        "kind": "header",
        "schema": RECORD_SCHEMA,
        "seed": seed,
        "policy": policy,
        "d_viol": d_viol,
        "scene": scene_to_dict(params.world),
        "channel": dataclasses.asdict(params.channel),
        "sonar": dataclasses.asdict(params.sonar),
        "formation": dataclasses.asdict(params.formation),
        "weights": dataclasses.asdict(params.weights),
        "d_cap": params.d_cap,
        "world0": world_to_dict(world0),
    }


def params_from_header(header: dict) -> tuple[EnvParams, WorldState]:
    params = EnvParams(
        world=parse_scene(header["scene"]),
        channel=comms.ChannelConfig(**header["channel"]),
        sonar=SonarConfig(**header["sonar"]),
        formation=FormationSpec(**header["formation"]),
        weights=RewardWeights(**header["weights"]),
        d_cap=float(header["d_cap"]),
    )
    return params, world_from_dict(header["world0"])


def sample_to_dict(info: dict) -> dict:
    return {
        "visible": info["visible"],
        "deviation": info["deviation"],
        "min_clearance": info["min_clearance"],
        "collided": info["collided"],
    }


class RecordWriter:
    def __init__(self, path, header: dict):
        self._f = open(path, "w")
        self._write(header)
        self._step = 0
        self._closed = False

    def _write(self, obj: dict) -> None:
        self._f.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")

    def write_step(self, time: float, leader_cmd: ControlInput,
                   follower_cmd: ControlInput, delivered, world: WorldState,
                   sample: dict, directives: dict | None = None) -> None:
        line = {
            "kind": "step",
            "k": self._step,
            "t": time,
            "leader_cmd": cmd_to_list(leader_cmd),
            "follower_cmd": cmd_to_list(follower_cmd),
            "delivered": message_to_dict(delivered),
            "world": world_to_dict(world),
            "sample": sample,
        }
        if directives:
            line.update(directives)
        self._write(line)
        self._step += 1

    def close(self, metrics: EpisodeMetrics | None) -> None:
        if self._closed:
            return
        footer: dict = {"kind": "footer"}
        if metrics is not None:
            footer["metrics"] = metrics.to_dict()
        self._write(footer)
        self._f.close()
        self._closed = True


@dataclasses.dataclass(frozen=True)
class ReplayReport:
    exact: bool
    steps: int
    divergence_step: int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"exact": self.exact, "steps": self.steps,
                "divergence_step": self.divergence_step, "detail": self.detail}


def _load_lines(path) -> tuple[dict, list[dict], dict]:
    try:
        with open(path) as f:
            raw = [line for line in f.read().splitlines() if line.strip()]
    except OSError as e:
        raise CorruptRecord(f"cannot read record: {e}") from e
    if not raw:
        raise CorruptRecord("empty record")
    try:
        lines = [json.loads(s) for s in raw]
    except json.JSONDecodeError as e:
        raise CorruptRecord(f"bad JSON in record: {e}") from e
    header = lines[0]
    if header.get("kind") != "header":
        raise CorruptRecord("first line is not a header")
    if header.get("schema") != RECORD_SCHEMA:
        raise SchemaMismatch(f"record schema {header.get('schema')!r}")
    if lines[-1].get("kind") != "footer":
        raise CorruptRecord("record has no footer (truncated?)")
    steps = lines[1:-1]
    if any(line.get("kind") != "step" for line in steps):
        raise CorruptRecord("unexpected line kind inside record body")
    return header, steps, lines[-1]


def _floats_equal(a, b) -> bool:
    fa, fb = float(a), float(b)
    return fa == fb or (math.isnan(fa) and math.isnan(fb))


def _world_equal(a: dict, b: dict) -> bool:
    for side in ("leader", "follower"):
        if a[side]["pose"] != b[side]["pose"]:
            return False
        for key in ("surge", "yaw_rate"):
            if not _floats_equal(a[side][key], b[side][key]):
                return False
    return (_floats_equal(a["time"], b["time"]) and a["mode"] == b["mode"]
            and a["collided"] == b["collided"])


def replay(path) -> ReplayReport:
    """Re-simulate the record from its header; report the first divergence."""
    header, steps, footer = _load_lines(path)
    params, world = params_from_header(header)
    channel = comms.ChannelState.fresh(params.channel)
    target = None
    acc = MetricsAccumulator(d_viol=float(header.get("d_viol", 1.0)))
    for line in steps:
        if "set_mode" in line:
            world = dataclasses.replace(world, leader_mode=line["set_mode"])
        if "set_formation" in line:
            radius, offset = line["set_formation"]
            params = dataclasses.replace(
                params, formation=FormationSpec(radius=radius, offset=offset))
        leader_cmd = cmd_from_list(line["leader_cmd"])
        follower_cmd = cmd_from_list(line["follower_cmd"])
        world, _obs, target, _r, info = advance(
            world, channel, params, target, leader_cmd, follower_cmd)
        k = line["k"]
        if not _world_equal(world_to_dict(world), line["world"]):
            return ReplayReport(False, len(steps), k, "world state diverged")
        if message_to_dict(info["delivered"]) != line["delivered"]:
            return ReplayReport(False, len(steps), k, "channel delivery diverged")
        sample = sample_to_dict(info)
        logged = line["sample"]
        if (sample["visible"] != logged["visible"]
                or sample["collided"] != logged["collided"]
                or not _floats_equal(sample["deviation"], logged["deviation"])
                or not _floats_equal(sample["min_clearance"], logged["min_clearance"])):
            return ReplayReport(False, len(steps), k, "metrics sample diverged")
        accumulate(acc, StepSample(
            time=info["time"], poi_visible=sample["visible"],
            formation_deviation=sample["deviation"],
            min_clearance=sample["min_clearance"], collided=sample["collided"]))
    if "metrics" in footer and steps:
        logged = footer["metrics"]
        computed = finalize(acc).to_dict()
        for key, val in computed.items():
            lv = logged.get(key)
            same = _floats_equal(val, lv) if isinstance(val, float) else val == lv
            if not same:
                return ReplayReport(False, len(steps), len(steps) - 1,
                                    f"footer metrics diverged on {key}")
    return ReplayReport(True, len(steps))
