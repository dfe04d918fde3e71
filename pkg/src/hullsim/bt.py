"""Behavior-tree mission executive: node semantics, blackboard, templates.

Trees are ticked synchronously by the session loop. Every node records its
last status, and any node can be forced to a fixed status by the operator,
which short-circuits its subtree until cleared.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from .world import Waypoint


class NodeStatus(enum.Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"
    RUNNING = "Running"


SUCCESS = NodeStatus.SUCCESS
FAILURE = NodeStatus.FAILURE
RUNNING = NodeStatus.RUNNING


class UnboundLeaf(Exception):
    """A Condition/Action name has no implementation in the bindings."""


class NoSuchNode(Exception):
    """Override target id not present in the tree."""


class EmptyMission(Exception):
    """Mission template instantiated with no waypoints."""


class BlackboardKeyError(KeyError):
    """Read of a key that was never written; missing keys are never defaulted."""


class Blackboard:
    def __init__(self, initial: dict | None = None):
        self._data: dict = dict(initial or {})

    def get(self, key: str):
        if key not in self._data:
            raise BlackboardKeyError(key)
        return self._data[key]

    def set(self, key: str, value) -> None:
        self._data[key] = value

    def has(self, key: str) -> bool:
        return key in self._data

    def keys(self):
        return self._data.keys()


LeafFn = Callable[[Blackboard], NodeStatus]
Bindings = dict[str, LeafFn]

SEQUENCE = "Sequence"
FALLBACK = "Fallback"
PARALLEL = "Parallel"
INVERTER = "Inverter"
REPEAT = "Repeat"
RETRY = "Retry"
CONDITION = "Condition"
ACTION = "Action"

_COMPOSITES = (SEQUENCE, FALLBACK, PARALLEL)
_DECORATORS = (INVERTER, REPEAT, RETRY)
_LEAVES = (CONDITION, ACTION)


@dataclass
class BTNode:
    id: int
    name: str
    kind: str
    children: list["BTNode"] = field(default_factory=list)
    memory: bool = False        # Sequence/Fallback
    threshold: int = 0          # Parallel success threshold M
    limit: int = 0              # Repeat/Retry n
    leaf: str = ""              # Condition/Action binding name
    last_status: NodeStatus | None = None
    forced: NodeStatus | None = None
    # runtime bookkeeping, reset when the node completes
    _resume: int = 0
    _count: int = 0

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


def _node(name, kind, children=(), **kw) -> BTNode:
    return BTNode(id=-1, name=name, kind=kind, children=list(children), **kw)


def sequence(name: str, children, memory: bool = False) -> BTNode:
    return _node(name, SEQUENCE, children, memory=memory)


def fallback(name: str, children, memory: bool = False) -> BTNode:
    return _node(name, FALLBACK, children, memory=memory)


def parallel(name: str, children, threshold: int) -> BTNode:
    return _node(name, PARALLEL, children, threshold=threshold)


def inverter(name: str, child: BTNode) -> BTNode:
    return _node(name, INVERTER, [child])


def repeat(name: str, child: BTNode, n: int) -> BTNode:
    return _node(name, REPEAT, [child], limit=n)


def retry(name: str, child: BTNode, n: int) -> BTNode:
    return _node(name, RETRY, [child], limit=n)


def condition(name: str, predicate: str) -> BTNode:
    return _node(name, CONDITION, leaf=predicate)


def action(name: str, action_name: str) -> BTNode:
    return _node(name, ACTION, leaf=action_name)


def finalize_tree(root: BTNode) -> BTNode:
    """Assign unique preorder ids and validate structure."""
    for i, node in enumerate(root.walk()):
        node.id = i
        if node.kind in _LEAVES and node.children:
            raise ValueError(f"leaf {node.name!r} must not have children")
        if node.kind in _COMPOSITES and not node.children:
            raise ValueError(f"composite {node.name!r} needs children")
        if node.kind in _DECORATORS and len(node.children) != 1:
            raise ValueError(f"decorator {node.name!r} needs exactly one child")
        if node.kind == PARALLEL and not (1 <= node.threshold <= len(node.children)):
            raise ValueError(f"parallel {node.name!r}: bad threshold {node.threshold}")
        if node.kind in (REPEAT, RETRY) and node.limit < 1:
            raise ValueError(f"{node.kind} {node.name!r}: limit must be >= 1")
    return root


def tick(node: BTNode, blackboard: Blackboard, bindings: Bindings) -> NodeStatus:
    if node.forced is not None:
        node.last_status = node.forced
        return node.forced
    status = _tick_inner(node, blackboard, bindings)
    node.last_status = status
    return status


def _tick_inner(node: BTNode, bb: Blackboard, bindings: Bindings) -> NodeStatus:
    kind = node.kind
    if kind == SEQUENCE:
        start = node._resume if node.memory else 0
        for i in range(start, len(node.children)):
            s = tick(node.children[i], bb, bindings)
            if s is RUNNING:
                node._resume = i
                return RUNNING
            if s is FAILURE:
                node._resume = 0
                return FAILURE
        node._resume = 0
        return SUCCESS
    if kind == FALLBACK:
        start = node._resume if node.memory else 0
        for i in range(start, len(node.children)):
            s = tick(node.children[i], bb, bindings)
            if s is RUNNING:
                node._resume = i
                return RUNNING
            if s is SUCCESS:
                node._resume = 0
                return SUCCESS
        node._resume = 0
        return FAILURE
    if kind == PARALLEL:
        statuses = [tick(c, bb, bindings) for c in node.children]
        succeeded = sum(1 for s in statuses if s is SUCCESS)
        failed = sum(1 for s in statuses if s is FAILURE)
        if succeeded >= node.threshold:
            return SUCCESS
        if len(node.children) - failed < node.threshold:
            return FAILURE
        return RUNNING
    if kind == INVERTER:
        s = tick(node.children[0], bb, bindings)
        if s is SUCCESS:
            return FAILURE
        if s is FAILURE:
            return SUCCESS
        return RUNNING
    if kind == REPEAT:
        while True:
            s = tick(node.children[0], bb, bindings)
            if s is RUNNING:
                return RUNNING
            if s is FAILURE:
                node._count = 0
                return FAILURE
            node._count += 1
            if node._count >= node.limit:
                node._count = 0
                return SUCCESS
    if kind == RETRY:
        while True:
            s = tick(node.children[0], bb, bindings)
            if s is RUNNING:
                return RUNNING
            if s is SUCCESS:
                node._count = 0
                return SUCCESS
            node._count += 1
            if node._count >= node.limit:
                node._count = 0
                return FAILURE
    if kind in _LEAVES:
        fn = bindings.get(node.leaf)
        if fn is None:
            raise UnboundLeaf(node.leaf)
        return fn(bb)
    raise ValueError(f"unknown node kind {kind!r}")


def override_node(tree: BTNode, node_id: int, forced: NodeStatus | None) -> BTNode:
    for node in tree.walk():
        if node.id == node_id:
            node.forced = forced
            return tree
    raise NoSuchNode(node_id)


def snapshot_tree(tree: BTNode) -> dict:
    """Serializable nested view: (id, name, kind, params, last_status, forced)."""
    return {
        "id": tree.id,
        "name": tree.name,
        "kind": tree.kind,
        "memory": tree.memory,
        "threshold": tree.threshold,
        "limit": tree.limit,
        "leaf": tree.leaf,
        "status": tree.last_status.value if tree.last_status else None,
        "forced": tree.forced.value if tree.forced else None,
        "children": [snapshot_tree(c) for c in tree.children],
    }


# --- mission templates -------------------------------------------------------

ABORT_FLAG = "mission.abort"
LEAF_ABORT_REQUESTED = "abort_requested"
LEAF_EXECUTE_ABORT = "execute_abort"
LEAF_TRANSIT_TO_START = "transit_to_start"
LEAF_REPORT_COMPLETE = "report_complete"


def goto_leaf_name(i: int) -> str:
    return f"goto_waypoint_{i}"


def inspect_leaf_name(i: int) -> str:
    return f"inspect_segment_{i}"


def build_hull_inspection(waypoints: list[Waypoint], name: str = "hull_inspection") -> BTNode:
    """Reactive abort branch over a memory inspection sequence (one leg per waypoint)."""
    if not waypoints:
        raise EmptyMission("waypoint list is empty")
    abort_branch = sequence("abort", [
        condition("AbortRequested?", LEAF_ABORT_REQUESTED),
        action("ExecuteAbort", LEAF_EXECUTE_ABORT),
    ])
    legs: list[BTNode] = [action("TransitToStart", LEAF_TRANSIT_TO_START)]
    for i in range(len(waypoints)):
        legs.append(action(f"GoToWaypoint_{i}", goto_leaf_name(i)))
        legs.append(action(f"InspectSegment_{i}", inspect_leaf_name(i)))
    legs.append(action("ReportComplete", LEAF_REPORT_COMPLETE))
    mission = sequence("inspection", legs, memory=True)
    root = fallback(name, [abort_branch, mission], memory=False)
    return finalize_tree(root)


@dataclass(frozen=True)
class Mission:
    template: str
    tree: BTNode
    waypoints: tuple[Waypoint, ...]


@dataclass(frozen=True)
class MissionTemplate:
    name: str
    param_schema: dict
    build: Callable[[dict], Mission]


def _build_inspection_mission(params: dict) -> Mission:
    wps = list(params["waypoints"])
    tree = build_hull_inspection(wps)
    return Mission(template="hull_inspection", tree=tree, waypoints=tuple(wps))


def _build_goto_mission(params: dict) -> Mission:
    wp = params["waypoint"]
    tree = build_hull_inspection([wp], name="goto")
    return Mission(template="goto", tree=tree, waypoints=(wp,))


TEMPLATES: dict[str, MissionTemplate] = {
    "hull_inspection": MissionTemplate(
        name="hull_inspection",
        param_schema={"waypoints": "ordered list of (point, heading)"},
        build=_build_inspection_mission,
    ),
    "goto": MissionTemplate(
        name="goto",
        param_schema={"waypoint": "(point, heading)"},
        build=_build_goto_mission,
    ),
}


def instantiate_mission(template: str, params: dict) -> Mission:
    if template not in TEMPLATES:
        raise KeyError(f"unknown mission template {template!r}")
    return TEMPLATES[template].build(params)
