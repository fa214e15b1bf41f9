"""Synchronous K actor-learner re-training of the shared network."""

from __future__ import annotations

import logging
from dataclasses import asdict
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from src.device.readout import HardwareRng, adc_quantize, quantize_probability
from src.device.store import CrossbarWeights, SoftwareWeights, make_store
from src.errors import DivergedIntegrationError
from src.network.forward import ForwardTrace, clamp_probability, shared_forward, td_error
from src.network.gradients import SharedGradients, shared_net_gradients, shared_rate_delta, sum_gradients
from src.network.weights import SharedNetWeights
from src.pendulum.dynamics import Action, PendulumEnv, PendulumState
from src.pendulum.pools import sample_initial_state
from src.schema import DeviceConfig, SharedLearningRates, SynchronousConfig, UpdateRule
from src.seeding import Stream, make_rng
from src.training.records import CheckpointRecord, SynchronousRun

logger = logging.getLogger(__name__)

Store = Union[SoftwareWeights, CrossbarWeights]


def aggregate_gradients(per_learner: Sequence[SharedGradients]) -> SharedGradients:
    """Sum of the learners' gradients in learner-index order."""
    if not per_learner:
        raise ValueError("no learner gradients to aggregate")
    return sum_gradients(per_learner)


def global_delta(summed: SharedGradients, rates: SharedLearningRates) -> SharedNetWeights:
    return shared_rate_delta(summed, rates)


class SharedPolicy:
    """Read path of the shared network (software or ADC/LFSR hardware)."""

    def __init__(
        self,
        device: DeviceConfig,
        hardware_readout: bool,
        rng: np.random.Generator,
        hw_rng: Optional[HardwareRng] = None,
    ):
        if hardware_readout and hw_rng is None:
            raise ValueError("hardware readout needs a hardware rng")
        self.device = device
        self.hardware_readout = hardware_readout
        self.rng = rng
        self.hw_rng = hw_rng

    def forward(self, w: SharedNetWeights, x: np.ndarray) -> ForwardTrace:
        trace = shared_forward(w, x)
        if self.hardware_readout:
            trace.value = adc_quantize(trace.value, self.device.value_full_scale, self.device.adc_bits)
            trace.prob = clamp_probability(quantize_probability(trace.prob, self.device.adc_bits))
        return trace

    def choose(self, p: float) -> Action:
        if self.hardware_readout:
            return self.hw_rng.action(p)
        return Action.CCW if self.rng.random() < p else Action.CW


class Learner:
    """One actor-learner: its own environment copy, weight store and episode state."""

    def __init__(
        self,
        index: int,
        env: PendulumEnv,
        store: Store,
        policy: SharedPolicy,
        pool: Sequence[PendulumState],
    ):
        self.index = index
        self.env = env
        self.store = store
        self.policy = policy
        self.pool = pool
        self.episodes = 0
        self._reset()

    def _reset(self) -> None:
        self.state = sample_initial_state(self.policy.rng, self.pool)
        self.episode_steps = 0
        self.episodes += 1

    def step(self, gamma: float) -> SharedGradients:
        """Act once and return the (unscaled by rate) gradient of this transition."""
        w = self.store.read()
        x = self.env.normalize(self.state)
        trace = self.policy.forward(w, x)
        a = self.policy.choose(trace.prob)
        try:
            nxt, r, failed = self.env.step(self.state, a)
        except DivergedIntegrationError as e:
            logger.warning("learner %d: %s; episode reset", self.index, e)
            nxt, r, failed = self.state, -1, True

        self.episode_steps += 1
        if failed:
            delta = td_error(r, 0.0, trace.value, gamma, terminal=True)
        else:
            v_next = self.policy.forward(w, self.env.normalize(nxt)).value
            delta = td_error(r, v_next, trace.value, gamma, terminal=False)

        grads = shared_net_gradients(w, trace, delta, int(a), 1.0)

        # forced fall after max_steps upright
        if failed or self.episode_steps >= self.env.max_steps:
            self._reset()
        else:
            self.state = nxt
        return grads


def evaluate_shared(
    weights: SharedNetWeights,
    env: PendulumEnv,
    states: Sequence[PendulumState],
    policy: SharedPolicy,
) -> List[int]:
    """Frozen-weight t2f of the shared network on each test state."""
    t2f: List[int] = []
    for s0 in states:
        state = s0
        t = 0
        for t in range(1, env.max_steps + 1):
            p = policy.forward(weights, env.normalize(state)).prob
            try:
                state, _, failed = env.step(state, policy.choose(p))
            except DivergedIntegrationError as e:
                logger.warning("test episode diverged: %s", e)
                break
            if failed:
                break
        t2f.append(t)
    return t2f


def make_learners(
    weights: SharedNetWeights,
    k: int,
    env: PendulumEnv,
    pool: Sequence[PendulumState],
    device: DeviceConfig,
    rule: UpdateRule,
    hardware_readout: bool,
    seed_keys: Sequence[int],
) -> List[Learner]:
    learners = []
    for i in range(k):
        rng = make_rng(*seed_keys, Stream.learners, i)
        hw = HardwareRng.for_device(device, *seed_keys, Stream.hardware_rng, i) if hardware_readout else None
        store = make_store(weights, rule, device, make_rng(device.seed, Stream.device, i))
        learners.append(Learner(i, env, store, SharedPolicy(device, hardware_readout, rng, hw), pool))
    return learners


def retrain_synchronous(
    weights: SharedNetWeights,
    k: int,
    env: PendulumEnv,
    pool: Sequence[PendulumState],
    test_states: Sequence[PendulumState],
    cfg: SynchronousConfig,
    device: DeviceConfig,
    *,
    rule: UpdateRule = UpdateRule.exact,
    hardware_readout: bool = False,
    seed_keys: Sequence[int] = (0,),
    progress: bool = False,
    on_checkpoint: Optional[Callable[[CheckpointRecord], None]] = None,
) -> SynchronousRun:
    """
    Every time step each learner acts in index order; the summed gradient is then written
    to all learners at once. Stops when K * steps reaches cfg.total_samples, evaluating
    learner 0's weights every cfg.checkpoint_every samples.
    """
    if k not in (1, 2, 4, 8):
        raise ValueError("the number of actor-learners must be 1, 2, 4 or 8")
    learners = make_learners(weights, k, env, pool, device, rule, hardware_readout, seed_keys)
    test_policy = SharedPolicy(
        device,
        hardware_readout,
        make_rng(*seed_keys, Stream.test),
        HardwareRng.for_device(device, *seed_keys, Stream.test) if hardware_readout else None,
    )

    run = SynchronousRun(weights=weights.copy())
    total_steps = -(-cfg.total_samples // k)
    next_checkpoint = cfg.checkpoint_every

    for count in tqdm(range(1, total_steps + 1), desc=f"sync K={k}", disable=not progress, leave=False):
        summed = aggregate_gradients([learner.step(cfg.gamma) for learner in learners])
        delta = global_delta(summed, cfg.rates)
        for learner in learners:
            learner.store.update(delta)

        samples = k * count
        if samples >= next_checkpoint or count == total_steps:
            t2f = evaluate_shared(learners[0].store.read(), env, test_states, test_policy)
            rec = CheckpointRecord(
                samples=samples,
                time_steps=count,
                updates_per_weight=count,
                mean_t2f=float(np.mean(t2f)) if t2f else 0.0,
            )
            run.checkpoints.append(rec)
            logger.debug("checkpoint samples=%d mean_t2f=%.1f", rec.samples, rec.mean_t2f)
            if on_checkpoint is not None:
                on_checkpoint(rec)
            while next_checkpoint <= samples:
                next_checkpoint += cfg.checkpoint_every

    run.weights = learners[0].store.snapshot()
    run.updates_per_weight = total_steps
    run.samples = k * total_steps
    run.episodes = sum(learner.episodes for learner in learners)
    run.device_counters = asdict(learners[0].store.counters)
    logger.info(
        "synchronous K=%d: %d samples, %d updates per weight, %d episodes",
        k, run.samples, run.updates_per_weight, run.episodes,
    )
    return run
