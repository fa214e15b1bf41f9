"""On-policy actor-critic trials for the separate evaluation/action networks."""

from __future__ import annotations

import logging
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.device.readout import HardwareRng, adc_quantize, quantize_probability
from src.device.store import CrossbarWeights, SoftwareWeights
from src.errors import DivergedIntegrationError
from src.network.forward import ForwardTrace, action_forward, clamp_probability, eval_forward, td_error
from src.network.gradients import separate_net_gradients
from src.network.weights import SeparateNetWeights
from src.pendulum.dynamics import Action, PendulumEnv, PendulumState
from src.pendulum.pools import sample_initial_state
from src.schema import DeviceConfig, ResolvedTraining
from src.training.discount import DiscountState, adjust_discount_rate
from src.training.records import Milestone, TrainingRun, TrialRecord

logger = logging.getLogger(__name__)

Store = Union[SoftwareWeights, CrossbarWeights]


class Mode(str, Enum):
    train = "train"
    test = "test"


def pq_gate(p: float, q: int, threshold: float) -> bool:
    """Update only when the sampled action disagreed strongly with the policy."""
    return abs(p - q) > threshold


class SeparateAgent:
    """
    Separate evaluation/action networks on a weight store.

    With hardware_readout the value is read through the ADC, the probability is digitized
    to 8 bits and actions come from the LFSR/CASR comparator; otherwise numpy draws.
    """

    def __init__(
        self,
        store: Store,
        training: ResolvedTraining,
        device: DeviceConfig,
        rng: np.random.Generator,
        hw_rng: Optional[HardwareRng] = None,
    ):
        if training.hardware_readout and hw_rng is None:
            raise ValueError("hardware readout needs a hardware rng")
        self.store = store
        self.training = training
        self.device = device
        self.rng = rng
        self.hw_rng = hw_rng
        self.gamma = training.gamma

    @property
    def weights(self) -> SeparateNetWeights:
        return self.store.read()

    def forward(self, x: np.ndarray) -> Tuple[ForwardTrace, ForwardTrace]:
        w = self.store.read()
        ev = eval_forward(w, x)
        ac = action_forward(w, x)
        if self.training.hardware_readout:
            ev.value = adc_quantize(ev.value, self.device.value_full_scale, self.device.adc_bits)
            ac.prob = clamp_probability(quantize_probability(ac.prob, self.device.adc_bits))
        return ev, ac

    def value(self, x: np.ndarray) -> float:
        v = eval_forward(self.store.read(), x).value
        if self.training.hardware_readout:
            v = adc_quantize(v, self.device.value_full_scale, self.device.adc_bits)
        return v

    def choose(self, p: float) -> Action:
        if self.training.hardware_readout:
            return self.hw_rng.action(p)
        return Action.CCW if self.rng.random() < p else Action.CW


def run_trial(
    agent: SeparateAgent,
    env: PendulumEnv,
    initial_state: PendulumState,
    mode: Mode = Mode.train,
) -> TrialRecord:
    """One balancing episode: until failure or max_steps. Test mode never touches the weights."""
    training = agent.training
    learn = mode == Mode.train
    gamma = agent.gamma

    state = initial_state
    x = env.normalize(state)
    ev, ac = agent.forward(x)
    updates = 0
    t = 0
    failed = False

    for t in range(1, env.max_steps + 1):
        a = agent.choose(ac.prob)
        try:
            state, r, failed = env.step(state, a)
        except DivergedIntegrationError as e:
            logger.warning("trial aborted after %d steps: %s", t, e)
            return TrialRecord(steps_survived=t, updates_applied=updates, success=False, gamma=gamma, diverged=True)

        x_next = env.normalize(state)
        if learn:
            v_next = 0.0 if failed else agent.value(x_next)
            delta = td_error(r, v_next, ev.value, gamma, terminal=failed)
            if not training.uses_pq or pq_gate(ac.prob, int(a), training.pq_threshold):
                agent.store.update(
                    separate_net_gradients(agent.weights, ev, ac, delta, int(a), training.rates)
                )
                updates += 1

        if failed:
            break
        ev, ac = agent.forward(x_next)

    return TrialRecord(
        steps_survived=t,
        updates_applied=updates,
        success=not failed and t == env.max_steps,
        gamma=gamma,
    )


def evaluate(
    agent: SeparateAgent, env: PendulumEnv, states: Sequence[PendulumState]
) -> List[TrialRecord]:
    """Frozen-weight test: every state used exactly once, in order."""
    return [run_trial(agent, env, s, Mode.test) for s in states]


def train_until_criterion(
    agent: SeparateAgent,
    env: PendulumEnv,
    pool: Sequence[PendulumState],
    milestones: Iterable[int] = (),
) -> TrainingRun:
    """
    Trials until stop_C cumulative successes (or max_trials).

    Weights are snapshotted the first time the success count reaches each milestone C,
    so one run serves several stop criteria. Unreached milestones get the final weights.
    """
    training = agent.training
    targets = sorted(set(milestones) | {training.stop_C})
    final_c = targets[-1]
    run = TrainingRun()
    discount = DiscountState(gamma=agent.gamma)
    successes = 0
    updates = 0

    while len(run.trials) < training.max_trials and successes < final_c:
        rec = run_trial(agent, env, sample_initial_state(agent.rng, pool), Mode.train)
        run.trials.append(rec)
        updates += rec.updates_applied
        if rec.success:
            successes += 1
            if successes in targets:
                run.milestones[successes] = Milestone(
                    criterion=successes,
                    reached=True,
                    trials=len(run.trials),
                    updates_per_weight=updates,
                    weights=agent.store.snapshot(),
                )
                logger.debug("milestone C=%d after %d trials", successes, len(run.trials))

        if training.variable_dr and len(run.trials) % training.dr_window == 0:
            window = run.trials[-training.dr_window:]
            discount = adjust_discount_rate(
                [t.success for t in window],
                float(np.mean([t.steps_survived for t in window])),
                discount,
                window=training.dr_window,
                step=training.dr_step,
                threshold=training.dr_success_threshold,
                gamma_min=training.gamma_min,
                gamma_max=training.gamma_max,
            )
            agent.gamma = discount.gamma

    for c in targets:
        if c not in run.milestones:
            run.milestones[c] = Milestone(
                criterion=c,
                reached=False,
                trials=len(run.trials),
                updates_per_weight=updates,
                weights=agent.store.snapshot(),
            )
    run.final_gamma = agent.gamma
    logger.info(
        "%s: %d trials, %d successes, %d updates per weight",
        training.approach.value, len(run.trials), successes, updates,
    )
    return run
