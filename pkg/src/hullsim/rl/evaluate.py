"""Greedy policy/controller evaluation over seeded randomized episodes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..metrics import (EpisodeMetrics, MetricsAccumulator, StepSample,
                       accumulate, finalize)
from .env import EnvParams, FollowerEnv


@dataclass(frozen=True)
class EvalReport:
    episodes: tuple[EpisodeMetrics, ...]
    returns: tuple[float, ...]

    @property
    def mean_return(self) -> float:
        return float(np.mean(self.returns))

    def _agg(self, key):
        vals = [getattr(m, key) for m in self.episodes]
        return {"mean": float(np.mean(vals)), "min": float(np.min(vals)),
                "max": float(np.max(vals))}

    def to_dict(self) -> dict:
        return {
            "episodes": len(self.episodes),
            "mean_return": self.mean_return,
            "visibility_fraction": self._agg("visibility_fraction"),
            "mean_formation_deviation": self._agg("mean_formation_deviation"),
            "safety_violations": self._agg("safety_violations"),
            "collisions": sum(1 for m in self.episodes if m.collided),
        }


def evaluate(controller, params: EnvParams, n_episodes: int, seed: int,
             d_viol: float = 1.0) -> EvalReport:
    """Run seeded episodes with the given command source and aggregate metrics."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    env = FollowerEnv(params)
    ep_seeds = np.random.default_rng(seed).integers(2**63, size=n_episodes)
    all_metrics: list[EpisodeMetrics] = []
    returns: list[float] = []
    for ep in range(n_episodes):
        ep_seed = int(ep_seeds[ep])
        obs = env.reset(ep_seed)
        controller.reset(ep_seed)
        acc = MetricsAccumulator(d_viol=d_viol)
        ep_return = 0.0
        done = False
        while not done:
            cmd = controller.command(obs, env.view())
            obs, r, done, info = env.step_command(cmd)
            ep_return += r
            accumulate(acc, StepSample(
                time=info["time"],
                poi_visible=info["visible"],
                formation_deviation=info["deviation"],
                min_clearance=info["min_clearance"],
                collided=info["collided"],
            ))
        all_metrics.append(finalize(acc))
        returns.append(ep_return)
    return EvalReport(episodes=tuple(all_metrics), returns=tuple(returns))
