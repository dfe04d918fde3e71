"""Console wire protocol: one JSON object per WebSocket text frame.

Every client frame carries an integer `ref` and receives exactly one matching
`ack` or `err`. The full schema with examples lives in docs/protocol.md.
"""

from __future__ import annotations

import json

PROTOCOL_SCHEMA = 1

CLIENT_TYPES = ("teleop", "set_mode", "nl_command", "bt_override",
                "set_formation", "control")
SERVER_TYPES = ("snapshot", "ack", "err", "summary")

# error codes
BAD_FRAME = "BadFrame"
BAD_VALUE = "BadValue"
WRONG_MODE = "WrongMode"
NOT_CONTROLLER = "NotController"
NO_SUCH_NODE = "NoSuchNode"
NO_SUCH_REGION = "NoSuchRegion"
NO_MISSION = "NoMission"


class FrameError(Exception):
    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


def _require(frame: dict, key: str, kinds) -> object:
    if key not in frame:
        raise FrameError(BAD_FRAME, f"missing field {key!r}")
    val = frame[key]
    if isinstance(val, bool) or not isinstance(val, kinds):
        raise FrameError(BAD_VALUE, f"field {key!r} has wrong type")
    return val


def _number(frame: dict, key: str) -> float:
    val = _require(frame, key, (int, float))
    return float(val)


def validate_client_frame(frame: dict) -> dict:
    """Normalize and validate one inbound frame; raises FrameError."""
    if not isinstance(frame, dict):
        raise FrameError(BAD_FRAME, "frame is not an object")
    kind = frame.get("type")
    if kind not in CLIENT_TYPES:
        raise FrameError(BAD_FRAME, f"unknown type {kind!r}")
    ref = frame.get("ref")
    if not isinstance(ref, int) or isinstance(ref, bool):
        raise FrameError(BAD_FRAME, "missing integer ref")
    if kind == "teleop":
        _number(frame, "surge")
        _number(frame, "yaw_rate")
    elif kind == "set_mode":
        if _require(frame, "mode", str) not in ("Manual", "Autonomous"):
            raise FrameError(BAD_VALUE, f"bad mode {frame.get('mode')!r}")
    elif kind == "nl_command":
        _require(frame, "text", str)
    elif kind == "bt_override":
        node_id = frame.get("node_id")
        if not isinstance(node_id, int) or isinstance(node_id, bool):
            raise FrameError(BAD_FRAME, "missing integer node_id")
        forced = frame.get("forced")
        if forced is not None and forced not in ("Success", "Failure", "Running"):
            raise FrameError(BAD_VALUE, f"bad forced status {forced!r}")
    elif kind == "set_formation":
        if "radius" not in frame and "offset" not in frame:
            raise FrameError(BAD_FRAME, "set_formation needs radius and/or offset")
        for key in ("radius", "offset"):
            if key in frame:
                _number(frame, key)
    elif kind == "control":
        if _require(frame, "action", str) not in ("Pause", "Resume", "Reset"):
            raise FrameError(BAD_VALUE, f"bad control action {frame.get('action')!r}")
    return frame


def ack(ref: int, result: dict | None = None) -> dict:
    frame: dict = {"type": "ack", "ref": ref, "ok": True}
    if result is not None:
        frame["result"] = result
    return frame


def err(ref: int | None, code: str, detail: str) -> dict:
    return {"type": "err", "ref": ref, "code": code, "detail": detail}


def summary(text: str) -> dict:
    return {"type": "summary", "text": text}


def encode_frame(frame: dict) -> str:
    return json.dumps(frame, sort_keys=True, separators=(",", ":"))


def decode_frame(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FrameError(BAD_FRAME, f"not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise FrameError(BAD_FRAME, "frame is not an object")
    return obj
