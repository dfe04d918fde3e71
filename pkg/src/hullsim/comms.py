"""Leader-to-follower pose broadcast over a lossy, delayed periodic link.

The leader's pose is enqueued at fixed period boundaries, each broadcast
surviving with probability 1 - drop_prob (seeded RNG, one draw per boundary).
Messages become available after `latency` seconds; the follower keeps only
the newest delivered pose (zero-order hold, staleness exposed as an age).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .world import Pose2D

# period boundaries are matched against multiples of dt, so a loose absolute
# tolerance on the modulus is safe
_BOUNDARY_EPS = 1e-9


@dataclass(frozen=True)
class ChannelConfig:
    period: float = 0.5
    latency: float = 0.2
    drop_prob: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be > 0")
        if self.latency < 0:
            raise ValueError("latency must be >= 0")
        if not (0.0 <= self.drop_prob <= 1.0):
            raise ValueError("drop_prob must be in [0, 1]")

    def validate_against_dt(self, dt: float) -> None:
        k = self.period / dt
        if abs(k - round(k)) > 1e-6:
            raise ValueError(f"period {self.period} is not a multiple of dt {dt}")


@dataclass(frozen=True)
class PoseMessage:
    seq: int
    sent_at: float
    pose: Pose2D


@dataclass
class ChannelState:
    """Mutable per-episode link state; owned by one session loop."""
    rng: random.Random
    in_flight: list[PoseMessage] = field(default_factory=list)
    last_delivered: PoseMessage | None = None
    next_seq: int = 0

    @classmethod
    def fresh(cls, config: ChannelConfig) -> "ChannelState":
        return cls(rng=random.Random(config.seed))


def _is_boundary(time: float, period: float) -> bool:
    k = round(time / period)
    return abs(time - k * period) <= _BOUNDARY_EPS * max(1.0, abs(time))


def broadcast(channel: ChannelState, config: ChannelConfig, time: float, pose: Pose2D) -> ChannelState:
    """At a period boundary, draw once and enqueue the pose unless dropped."""
    if not _is_boundary(time, config.period):
        return channel
    seq = channel.next_seq
    channel.next_seq += 1
    if channel.rng.random() >= config.drop_prob:
        channel.in_flight.append(PoseMessage(seq=seq, sent_at=time, pose=pose))
    return channel


def deliver(channel: ChannelState, config: ChannelConfig, time: float) -> tuple[ChannelState, PoseMessage | None]:
    """Release everything due by `time`; only the newest released message survives."""
    due = [m for m in channel.in_flight if m.sent_at + config.latency <= time]
    if not due:
        return channel, None
    channel.in_flight = [m for m in channel.in_flight if m.sent_at + config.latency > time]
    newest = max(due, key=lambda m: m.seq)
    if channel.last_delivered is not None and newest.seq <= channel.last_delivered.seq:
        return channel, None
    channel.last_delivered = newest
    return channel, newest


def last_known(channel: ChannelState, time: float) -> tuple[Pose2D, float] | None:
    """Last delivered pose and its age, or None if nothing was ever delivered."""
    if channel.last_delivered is None:
        return None
    return channel.last_delivered.pose, time - channel.last_delivered.sent_at
