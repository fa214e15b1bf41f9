"""Off-policy pre-training of the shared network from a replay buffer."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from tqdm import tqdm

from src.device.store import SoftwareWeights
from src.errors import DivergedIntegrationError
from src.network.forward import shared_forward, td_error
from src.network.gradients import shared_net_gradients, shared_rate_delta
from src.network.weights import SharedNetWeights
from src.pendulum.dynamics import Action, PendulumEnv, PendulumState
from src.schema import OffPolicyConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Experience:
    s: PendulumState
    a: Action
    r: int
    s_next: PendulumState


class ReplayBuffer:
    """Fixed pool of (s, a, r, s') tuples stored column-wise."""

    def __init__(self, states: np.ndarray, actions: np.ndarray, rewards: np.ndarray, next_states: np.ndarray):
        n = len(actions)
        if not (states.shape == (n, 4) and next_states.shape == (n, 4) and rewards.shape == (n,)):
            raise ValueError("replay buffer columns have inconsistent shapes")
        if not np.all(np.isin(rewards, (0, -1))):
            raise ValueError("replay rewards must be 0 or -1")
        self.states = states
        self.actions = actions
        self.rewards = rewards
        self.next_states = next_states

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, i: int) -> Experience:
        return Experience(
            s=PendulumState(*map(float, self.states[i])),
            a=Action(int(self.actions[i])),
            r=int(self.rewards[i]),
            s_next=PendulumState(*map(float, self.next_states[i])),
        )

    def normalized(self, env: PendulumEnv) -> tuple[np.ndarray, np.ndarray]:
        """Network inputs for s and s' of every entry."""
        bounds = np.asarray(env.config.bounds)
        ones = np.ones((len(self), 1))
        x = np.hstack([self.states / bounds, ones])
        x_next = np.hstack([self.next_states / bounds, ones])
        return x, x_next


def build_replay_buffer(env: PendulumEnv, size: int, rng: np.random.Generator) -> ReplayBuffer:
    """
    Random transitions: s uniform in the normalization box with alpha inside the upright
    region, a uniform over {CW, CCW}, s' one step later.
    """
    cfg = env.config
    states = np.empty((size, 4))
    actions = np.empty(size, dtype=np.int64)
    rewards = np.empty(size, dtype=np.int64)
    next_states = np.empty((size, 4))
    limit = cfg.upright_limit

    i = 0
    while i < size:
        s = PendulumState(
            float(rng.uniform(-cfg.theta_max, cfg.theta_max)),
            float(rng.uniform(-cfg.theta_dot_max, cfg.theta_dot_max)),
            float(rng.uniform(-limit, limit)),
            float(rng.uniform(-cfg.alpha_dot_max, cfg.alpha_dot_max)),
        )
        if abs(s.alpha) >= limit:
            continue
        a = Action(int(rng.integers(2)))
        try:
            s_next, r, _ = env.step(s, a)
        except DivergedIntegrationError:
            logger.warning("discarded a diverged replay sample")
            continue
        states[i] = s.as_tuple()
        actions[i] = int(a)
        rewards[i] = r
        next_states[i] = s_next.as_tuple()
        i += 1

    logger.info("replay buffer: %d samples, %.1f%% terminal", size, 100.0 * np.mean(rewards == -1))
    return ReplayBuffer(states, actions, rewards, next_states)


def importance_ratio(p: float, a: int, behavior_prob: float = 0.5) -> float:
    """pi(a|s) / pi_b(a|s) where p and behavior_prob are CCW probabilities."""
    target = p if a == Action.CCW else 1.0 - p
    behavior = behavior_prob if a == Action.CCW else 1.0 - behavior_prob
    return target / behavior


def pretrain_offpolicy(
    weights: SharedNetWeights,
    buffer: ReplayBuffer,
    env: PendulumEnv,
    cfg: OffPolicyConfig,
    rng: np.random.Generator,
    w_max: float,
    *,
    behavior_prob: Optional[float] = None,
    progress: bool = False,
) -> SharedNetWeights:
    """
    Importance-weighted one-step actor-critic updates on uniformly drawn replay samples
    until cfg.samples have been consumed. Updates are written exactly (software path).
    """
    if len(buffer) == 0:
        raise ValueError("replay buffer is empty")
    behavior = cfg.behavior_prob if behavior_prob is None else behavior_prob
    store = SoftwareWeights(weights, w_max)
    x_all, x_next_all = buffer.normalized(env)

    for _ in tqdm(range(cfg.samples), desc="offpolicy", disable=not progress, leave=False):
        i = int(rng.integers(len(buffer)))
        w = store.read()
        e = buffer[i]
        a = int(e.a)
        terminal = e.r == -1

        trace = shared_forward(w, x_all[i])
        v_next = 0.0 if terminal else shared_forward(w, x_next_all[i]).value
        delta = td_error(e.r, v_next, trace.value, cfg.gamma, terminal)
        rho = importance_ratio(trace.prob, a, behavior)
        store.update(shared_rate_delta(shared_net_gradients(w, trace, delta, a, rho), cfg.rates))

    if store.counters.saturations:
        logger.info("offpolicy pre-training clamped %d weight writes", store.counters.saturations)
    return store.snapshot()
