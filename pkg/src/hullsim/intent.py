"""Natural-language command layer.

A deterministic keyword grammar is the authority of record; an optional
external LLM endpoint may produce the same schema-validated commands or
rephrase operator summaries, but never executes free-form output and always
falls back to the grammar.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Callable

from .metrics import EpisodeMetrics, Event
from .world import WorldConfig, Waypoint, region_waypoints
import math

ACTIONS = ("Inspect", "GoTo", "Report", "Abort", "Hold", "SetFormation")

VERB_TABLE = {
    "inspect": "Inspect", "survey": "Inspect", "check": "Inspect",
    "go": "GoTo", "goto": "GoTo", "navigate": "GoTo",
    "report": "Report",
    "abort": "Abort", "stop": "Abort", "emergency": "Abort",
    "hold": "Hold", "wait": "Hold", "pause": "Hold",
    "formation": "SetFormation", "keep": "SetFormation",
}

REGION_TABLE = {
    "port": "Port", "left": "Port",
    "starboard": "Starboard", "right": "Starboard",
    "bow": "Bow", "front": "Bow",
    "stern": "Stern", "aft": "Stern", "rear": "Stern",
    "hull": "WholeHull", "whole": "WholeHull",
}

NUMBER_KEYWORDS = ("radius", "offset", "x", "y")

STOPWORDS = {
    "the", "a", "an", "of", "to", "at", "on", "in", "and", "for", "with",
    "side", "sides", "near", "around", "area", "please", "now", "then",
    "me", "us", "mission", "anomalies", "anomaly", "ship", "vessel", "auv",
    "position", "there", "it", "its", "m", "meters", "rad", "radians",
}

# errors
UNKNOWN_VERB = "UnknownVerb"
UNKNOWN_REGION = "UnknownRegion"
MISSING_ARGUMENT = "MissingArgument"
LLM_UNAVAILABLE = "LlmUnavailable"
SCHEMA_VIOLATION = "SchemaViolation"

SOURCE_GRAMMAR = "Grammar"
SOURCE_LLM = "Llm"

API_KEY_ENV = "HULLSIM_LLM_API_KEY"


@dataclass(frozen=True)
class IntentCommand:
    action: str
    region: str | None = None
    point: tuple[float, float] | None = None
    params: dict = field(default_factory=dict)

    def validate(self) -> str | None:
        """Return a problem description, or None if the command is well-formed."""
        if self.action not in ACTIONS:
            return f"unknown action {self.action!r}"
        if self.region is not None and self.region not in REGION_TABLE.values():
            return f"unknown region {self.region!r}"
        if self.action in ("Inspect", "Report", "GoTo"):
            if self.region is None and self.point is None:
                return f"{self.action} requires a region or a point"
        if self.action in ("Abort", "Hold"):
            if self.region is not None or self.point is not None:
                return f"{self.action} carries no region or point"
        if self.action == "SetFormation":
            if "radius" not in self.params and "offset" not in self.params:
                return "SetFormation requires radius and/or offset"
        return None

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "region": self.region,
            "point": list(self.point) if self.point is not None else None,
            "params": {k: self.params[k] for k in sorted(self.params)},
        }


@dataclass(frozen=True)
class ParseResult:
    command: IntentCommand | None = None
    source: str | None = None
    error: str | None = None
    detail: str = ""

    def __post_init__(self):
        if (self.command is None) == (self.error is None):
            raise ValueError("exactly one of command/error must be set")

    @property
    def ok(self) -> bool:
        return self.command is not None


@dataclass(frozen=True)
class LlmConfig:
    enabled: bool = False
    endpoint: str = ""
    model: str = ""
    timeout: float = 5.0

    @staticmethod
    def api_key() -> str | None:
        return os.environ.get(API_KEY_ENV)


def _tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(".,!?;:'\"()[]{}")
        if tok:
            tokens.append(tok)
    return tokens


def _as_number(tok: str) -> float | None:
    if not re.fullmatch(r"-?\d+(\.\d+)?", tok):
        return None
    return float(tok)


def parse_grammar(text: str) -> ParseResult:
    """Deterministic keyword parse of an operator phrase into an IntentCommand."""
    tokens = _tokenize(text)
    verb = None
    for tok in tokens:
        if tok in VERB_TABLE:
            verb = VERB_TABLE[tok]
            break
    if verb is None:
        return ParseResult(error=UNKNOWN_VERB, detail=f"no known verb in {text!r}")

    region = None
    if verb not in ("Abort", "Hold"):
        for tok in tokens:
            if tok in REGION_TABLE:
                region = REGION_TABLE[tok]
                break

    # numbers bind to the nearest preceding keyword
    bound: dict[str, float] = {}
    last_keyword: str | None = None
    for tok in tokens:
        if tok in NUMBER_KEYWORDS:
            last_keyword = tok
            continue
        val = _as_number(tok)
        if val is not None and last_keyword is not None and last_keyword not in bound:
            bound[last_keyword] = val

    point = None
    if "x" in bound and "y" in bound:
        point = (bound["x"], bound["y"])
    params = {k: v for k, v in bound.items() if k in ("radius", "offset")}

    if verb in ("Inspect", "Report", "GoTo") and region is None and point is None:
        leftovers = [
            t for t in tokens
            if t not in STOPWORDS and t not in VERB_TABLE and t not in NUMBER_KEYWORDS
            and _as_number(t) is None
        ]
        if leftovers:
            return ParseResult(error=UNKNOWN_REGION,
                               detail=f"no known region in {leftovers!r}")
        return ParseResult(error=MISSING_ARGUMENT,
                           detail=f"{verb} requires a region or a point")
    if verb in ("Abort", "Hold"):
        region, point, params = None, None, {}
    if verb == "SetFormation" and not params:
        return ParseResult(error=MISSING_ARGUMENT,
                           detail="SetFormation requires radius and/or offset")

    cmd = IntentCommand(action=verb, region=region, point=point, params=params)
    problem = cmd.validate()
    if problem is not None:
        return ParseResult(error=MISSING_ARGUMENT, detail=problem)
    return ParseResult(command=cmd, source=SOURCE_GRAMMAR)


# --- LLM client ---------------------------------------------------------------

SCHEMA_TEXT = json.dumps({
    "action": "one of " + "/".join(ACTIONS),
    "region": "optional, one of Port/Starboard/Bow/Stern/WholeHull",
    "point": "optional [x, y] in meters",
    "params": "optional map, numeric values (radius, offset)",
}, indent=2)

PREAMBLE = (
    "You translate one operator instruction for a hull-inspection vehicle team "
    "into exactly one JSON object with this schema, and output nothing else:\n"
)

Transport = Callable[[str, dict, float, str | None], str]


def default_transport(endpoint: str, payload: dict, timeout: float, api_key: str | None) -> str:
    import requests

    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    resp = requests.post(endpoint, json=payload, timeout=timeout, headers=headers)
    resp.raise_for_status()
    return resp.text


def _first_json_object(text: str) -> dict | None:
    decoder = json.JSONDecoder()
    for m in re.finditer(r"\{", text):
        try:
            obj, _ = decoder.raw_decode(text, m.start())
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    return None


def _command_from_payload(obj: dict) -> tuple[IntentCommand | None, str]:
    action = obj.get("action")
    if not isinstance(action, str) or action not in ACTIONS:
        return None, f"bad action {action!r}"
    region = obj.get("region")
    if region is not None and region not in REGION_TABLE.values():
        return None, f"bad region {region!r}"
    point = obj.get("point")
    if point is not None:
        if (not isinstance(point, (list, tuple)) or len(point) != 2
                or not all(isinstance(v, (int, float)) for v in point)):
            return None, f"bad point {point!r}"
        point = (float(point[0]), float(point[1]))
    params = obj.get("params") or {}
    if not isinstance(params, dict) or not all(
            isinstance(k, str) and isinstance(v, (int, float)) for k, v in params.items()):
        return None, f"bad params {params!r}"
    cmd = IntentCommand(action=action, region=region, point=point,
                        params={k: float(v) for k, v in params.items()})
    problem = cmd.validate()
    if problem is not None:
        return None, problem
    return cmd, ""


def llm_parse(text: str, config: LlmConfig, transport: Transport | None = None) -> ParseResult:
    """Ask the configured endpoint for a structured command; fall back to the grammar."""
    if not config.enabled:
        raise ValueError("llm_parse requires config.enabled")
    transport = transport or default_transport
    payload = {
        "model": config.model,
        "messages": [{"role": "user",
                      "content": PREAMBLE + SCHEMA_TEXT + "\nInstruction: " + text}],
    }
    try:
        reply = transport(config.endpoint, payload, config.timeout, LlmConfig.api_key())
    except Exception as e:
        return _fallback(text, LLM_UNAVAILABLE, f"transport failed: {e!r}")
    obj = _first_json_object(reply)
    if obj is None:
        return _fallback(text, SCHEMA_VIOLATION, "no JSON object in reply")
    cmd, problem = _command_from_payload(obj)
    if cmd is None:
        return _fallback(text, SCHEMA_VIOLATION, problem)
    return ParseResult(command=cmd, source=SOURCE_LLM)


def _fallback(text: str, code: str, detail: str) -> ParseResult:
    note = f"{code}: {detail}; fell back to grammar"
    res = parse_grammar(text)
    if res.ok:
        return ParseResult(command=res.command, source=SOURCE_GRAMMAR, detail=note)
    return ParseResult(error=res.error, detail=f"{note}; {res.detail}")


def parse_command(text: str, config: LlmConfig | None = None,
                  transport: Transport | None = None) -> ParseResult:
    """Session entry point: grammar only unless the LLM is enabled."""
    if config is not None and config.enabled:
        return llm_parse(text, config, transport)
    return parse_grammar(text)


# --- grounding ----------------------------------------------------------------

@dataclass(frozen=True)
class CommandEffect:
    """What the session should do for a parsed command."""
    kind: str  # start_mission | abort | hold | report | set_formation
    template: str | None = None
    mission_params: dict | None = None
    formation_params: dict | None = None


def _facing_poi(point, world: WorldConfig) -> Waypoint:
    heading = math.atan2(world.poi[1] - point[1], world.poi[0] - point[0])
    return Waypoint(position=(float(point[0]), float(point[1])), heading=heading)


def command_to_mission(cmd: IntentCommand, world: WorldConfig) -> CommandEffect:
    """Ground a validated command into a mission instantiation or session effect."""
    if cmd.action in ("Inspect", "GoTo"):
        if cmd.region is not None:
            wps = region_waypoints(world, cmd.region)
            if cmd.action == "GoTo":
                return CommandEffect(kind="start_mission", template="goto",
                                     mission_params={"waypoint": wps[0]})
            return CommandEffect(kind="start_mission", template="hull_inspection",
                                 mission_params={"waypoints": wps})
        wp = _facing_poi(cmd.point, world)
        return CommandEffect(kind="start_mission", template="goto",
                             mission_params={"waypoint": wp})
    if cmd.action == "Abort":
        return CommandEffect(kind="abort")
    if cmd.action == "Hold":
        return CommandEffect(kind="hold")
    if cmd.action == "Report":
        return CommandEffect(kind="report")
    if cmd.action == "SetFormation":
        return CommandEffect(kind="set_formation", formation_params=dict(cmd.params))
    raise ValueError(f"unhandled action {cmd.action!r}")


# --- feedback summaries --------------------------------------------------------

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")


def render_summary(m: EpisodeMetrics, events: list[Event]) -> str:
    collision = "collision occurred" if m.collided else "no collision"
    return (
        f"PoI visible {100.0 * m.visibility_fraction:.0f}% of the time; "
        f"mean formation deviation {m.mean_formation_deviation:.2f} m; "
        f"{m.safety_violations} safety events; {collision}; "
        f"{m.steps} steps; {len(events)} logged events."
    )


def _numbers(text: str) -> list[float]:
    return sorted(float(s) for s in _NUMBER_RE.findall(text))


def summarize_feedback(m: EpisodeMetrics, events: list[Event],
                       config: LlmConfig | None = None,
                       transport: Transport | None = None) -> str:
    """Deterministic template summary; an enabled LLM may rephrase it, but any
    change to the numbers is rejected and the template text returned."""
    template = render_summary(m, events)
    if config is None or not config.enabled:
        return template
    transport = transport or default_transport
    event_lines = "\n".join(f"[t={e.time:.1f}] {e.kind}: {e.text}" for e in events)
    payload = {
        "model": config.model,
        "messages": [{
            "role": "user",
            "content": ("Rephrase this mission summary for an operator without "
                        "changing any numeric value:\n" + template +
                        ("\nEvents:\n" + event_lines if events else "")),
        }],
    }
    try:
        reply = transport(config.endpoint, payload, config.timeout, LlmConfig.api_key())
    except Exception:
        return template
    reply = reply.strip()
    if not reply or _numbers(reply) != _numbers(template):
        return template
    return reply
