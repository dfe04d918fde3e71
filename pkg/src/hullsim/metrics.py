"""Streaming coordination-quality metrics and episode bookkeeping.

Three per-episode measures: fraction of steps with the PoI visible, mean
deviation from the formation target, and the count of edge-triggered
near-collision events (clearance dropping below d_viol).
"""

from __future__ import annotations

from dataclasses import dataclass

D_VIOL_DEFAULT = 1.0


class EmptyEpisode(Exception):
    """Finalizing an accumulator that saw no samples."""


@dataclass(frozen=True)
class StepSample:
    time: float
    poi_visible: bool
    formation_deviation: float
    min_clearance: float
    collided: bool = False


@dataclass(frozen=True)
class EpisodeMetrics:
    visibility_fraction: float
    mean_formation_deviation: float
    safety_violations: int
    collided: bool
    steps: int

    def to_dict(self) -> dict:
        return {
            "visibility_fraction": self.visibility_fraction,
            "mean_formation_deviation": self.mean_formation_deviation,
            "safety_violations": self.safety_violations,
            "collided": self.collided,
            "steps": self.steps,
        }


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    text: str


@dataclass
class MetricsAccumulator:
    """Running sums for one episode. `in_zone` may be seeded from a previous
    split so concatenated episode halves recombine exactly."""
    d_viol: float = D_VIOL_DEFAULT
    steps: int = 0
    visible_count: int = 0
    deviation_sum: float = 0.0
    violations: int = 0
    collided: bool = False
    in_zone: bool = False


def accumulate(acc: MetricsAccumulator, sample: StepSample,
               d_viol: float | None = None) -> MetricsAccumulator:
    d_viol = acc.d_viol if d_viol is None else d_viol
    acc.steps += 1
    if sample.poi_visible:
        acc.visible_count += 1
    acc.deviation_sum += sample.formation_deviation
    below = sample.min_clearance < d_viol
    if below and not acc.in_zone:
        acc.violations += 1
    acc.in_zone = below
    if sample.collided:
        acc.collided = True
    return acc


def finalize(acc: MetricsAccumulator) -> EpisodeMetrics:
    if acc.steps == 0:
        raise EmptyEpisode("no samples accumulated")
    return EpisodeMetrics(
        visibility_fraction=acc.visible_count / acc.steps,
        mean_formation_deviation=acc.deviation_sum / acc.steps,
        safety_violations=acc.violations,
        collided=acc.collided,
        steps=acc.steps,
    )


def peek(acc: MetricsAccumulator) -> EpisodeMetrics | None:
    """Metrics so far, or None before the first sample."""
    if acc.steps == 0:
        return None
    return finalize(acc)
