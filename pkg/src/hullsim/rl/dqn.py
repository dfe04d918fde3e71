"""Q-learning with experience replay and a periodically synced target network."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .env import EnvParams, FollowerEnv, OBS_DIM, OBS_SCALE, N_ACTIONS
from .net import QNetwork
from .policy import Policy


class DivergenceDetected(Exception):
    """Mean |Q| exceeded the configured bound; training aborted.

    Carries the per-episode logs accumulated before the abort."""

    def __init__(self, message: str, logs=None):
        super().__init__(message)
        self.logs = logs or []


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 400
    max_steps_per_episode: int = 600
    gamma: float = 0.99
    lr: float = 1e-3
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_steps: int = 20_000
    replay_capacity: int = 50_000
    batch_size: int = 64
    target_sync: int = 500
    warmup: int = 1_000
    hidden: tuple[int, ...] = (64, 64)
    q_bound: float = 1e5
    seed: int = 1

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must be in (0, 1)")
        for e in (self.eps_start, self.eps_end):
            if not (0.0 <= e <= 1.0):
                raise ValueError("epsilon schedule must stay in [0, 1]")

    def epsilon(self, step: int) -> float:
        if step >= self.eps_decay_steps:
            return self.eps_end
        frac = step / self.eps_decay_steps
        return self.eps_start + frac * (self.eps_end - self.eps_start)


class ReplayBuffer:
    def __init__(self, capacity: int, rng: np.random.Generator):
        self.capacity = capacity
        self.rng = rng
        self.obs = np.zeros((capacity, OBS_DIM))
        self.next_obs = np.zeros((capacity, OBS_DIM))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.size = 0
        self.pos = 0

    def push(self, obs, action, r, next_obs, done) -> None:
        i = self.pos
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = r
        self.next_obs[i] = next_obs
        self.dones[i] = 1.0 if done else 0.0
        self.pos = (self.pos + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, n: int):
        idx = self.rng.integers(self.size, size=n)
        return (self.obs[idx], self.actions[idx], self.rewards[idx],
                self.next_obs[idx], self.dones[idx])

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True)
class EpisodeLog:
    episode: int
    ret: float
    epsilon: float
    loss: float
    steps: int

    def to_json(self) -> str:
        return json.dumps({"episode": self.episode, "return": self.ret,
                           "epsilon": self.epsilon, "loss": self.loss,
                           "steps": self.steps}, sort_keys=True)


def train(config: TrainConfig, params: EnvParams) -> tuple[Policy, list[EpisodeLog]]:
    """Train the follower against the scripted leader patrol; fully seeded."""
    ss = np.random.SeedSequence(config.seed)
    net_ss, eps_ss, replay_ss, ep_ss = ss.spawn(4)
    sizes = (OBS_DIM,) + tuple(config.hidden) + (N_ACTIONS,)
    net = QNetwork(sizes, rng=np.random.default_rng(net_ss))
    target_net = net.copy()
    explore_rng = np.random.default_rng(eps_ss)
    replay = ReplayBuffer(config.replay_capacity, np.random.default_rng(replay_ss))
    ep_seeds = np.random.default_rng(ep_ss).integers(2**63, size=max(config.episodes, 1))

    env_params = params
    if params.max_steps != config.max_steps_per_episode:
        from dataclasses import replace
        env_params = replace(params, max_steps=config.max_steps_per_episode)
    env = FollowerEnv(env_params)

    logs: list[EpisodeLog] = []
    global_step = 0
    last_loss = 0.0
    for ep in range(config.episodes):
        obs = env.reset(int(ep_seeds[ep]))
        ep_return = 0.0
        for _ in range(config.max_steps_per_episode):
            eps = config.epsilon(global_step)
            if explore_rng.random() < eps:
                action = int(explore_rng.integers(N_ACTIONS))
            else:
                q = net.forward(obs * OBS_SCALE)[0]
                action = int(np.argmax(q))
            next_obs, r, done, _info = env.step(action)
            replay.push(obs * OBS_SCALE, action, r, next_obs * OBS_SCALE, done)
            obs = next_obs
            ep_return += r
            global_step += 1
            if len(replay) >= max(config.warmup, config.batch_size):
                bo, ba, br, bn, bd = replay.sample(config.batch_size)
                q_next = target_net.forward(bn)
                targets = br + config.gamma * (1.0 - bd) * q_next.max(axis=1)
                last_loss, gw, gb = net.loss_and_grads(bo, ba, targets)
                net.apply_gradients(gw, gb, config.lr)
                mean_abs_q = float(np.mean(np.abs(net.forward(bo))))
                if mean_abs_q > config.q_bound:
                    raise DivergenceDetected(
                        f"mean |Q| = {mean_abs_q:.3g} exceeds bound {config.q_bound:g} "
                        f"at step {global_step}", logs=logs)
                if global_step % config.target_sync == 0:
                    target_net = net.copy()
            if done:
                break
        logs.append(EpisodeLog(episode=ep, ret=ep_return,
                               epsilon=config.epsilon(global_step),
                               loss=last_loss, steps=env.steps))
    return Policy(net), logs


def write_log(logs: list[EpisodeLog], path) -> None:
    with open(path, "w") as f:
        for entry in logs:
            f.write(entry.to_json() + "\n")
