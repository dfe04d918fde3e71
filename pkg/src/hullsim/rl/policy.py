"""Follower command sources: greedy learned policy, scripted baseline, random.

All three drive the same environment through ControlInputs so episode returns
and metrics are directly comparable.
"""

from __future__ import annotations

import numpy as np

from ..guidance import ControllerGains, baseline_controller
from ..world import ControlInput
from .env import EnvView, OBS_SCALE, action_inputs
from .net import QNetwork


class Policy:
    """Q-network plus greedy action selection over the discrete set."""

    def __init__(self, net: QNetwork, greedy: bool = True):
        self.net = net
        self.greedy = greedy

    def act(self, obs: np.ndarray) -> int:
        q = self.net.forward(np.asarray(obs) * OBS_SCALE)[0]
        return int(np.argmax(q))

    def save(self, path) -> None:
        self.net.save(path)

    @classmethod
    def load(cls, path) -> "Policy":
        return cls(QNetwork.load(path))


class PolicyController:
    def __init__(self, policy: Policy, world_cfg):
        self.policy = policy
        self.actions = action_inputs(world_cfg)

    def reset(self, seed: int) -> None:
        pass

    def command(self, obs: np.ndarray, view: EnvView) -> ControlInput:
        return self.actions[self.policy.act(obs)]


class RandomController:
    """Uniform random discrete action each step, seeded per episode."""

    def __init__(self, world_cfg):
        self.actions = action_inputs(world_cfg)
        self.rng = np.random.default_rng(0)

    def reset(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)

    def command(self, obs: np.ndarray, view: EnvView) -> ControlInput:
        return self.actions[int(self.rng.integers(len(self.actions)))]


class BaselineFollowerController:
    """Scripted pure-pursuit comparator; holds still until a target exists."""

    def __init__(self, gains: ControllerGains = ControllerGains()):
        self.gains = gains

    def reset(self, seed: int) -> None:
        pass

    def command(self, obs: np.ndarray, view: EnvView) -> ControlInput:
        if view.target is None:
            return ControlInput()
        return baseline_controller(view.follower, view.target, view.world, self.gains)
