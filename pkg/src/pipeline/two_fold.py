"""Ex-situ pre-training followed by in-situ re-training, for one agent."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from src.device.readout import HardwareRng
from src.device.store import CrossbarWeights, SoftwareWeights, make_store
from src.errors import ConfigurationError
from src.harness.metrics import MetricsRecord, compute_metrics, efficiency
from src.harness.population import AgentSpec
from src.network.checkpoint import save_checkpoint
from src.network.weights import SeparateNetWeights, SharedNetWeights, random_separate_weights, random_shared_weights
from src.pendulum.dynamics import PendulumEnv, PendulumState
from src.pendulum.pools import StatePools, build_pools, test_subsample
from src.schema import (
    SCENARIO_APPROACHES,
    Approach,
    DeviceConfig,
    ExperimentConfig,
    ResolvedTraining,
    Scale,
    Scenario,
    UpdateRule,
    VariationMode,
    pretrain_as_training,
    resolve_training,
)
from src.seeding import Stream, make_rng
from src.training.offpolicy import build_replay_buffer, pretrain_offpolicy
from src.training.records import SynchronousRun, TrainingRun, TrialRecord
from src.training.synchronous import SharedPolicy, evaluate_shared, retrain_synchronous
from src.training.trial import SeparateAgent, evaluate, train_until_criterion

logger = logging.getLogger(__name__)

DESK_TEST_SUBSAMPLE = 100


# ----------------------------
# Shared helpers
# ----------------------------

def check_compatibility(scenario: Scenario, approach: Approach) -> None:
    if approach not in SCENARIO_APPROACHES[scenario]:
        allowed = ", ".join(a.value for a in SCENARIO_APPROACHES[scenario])
        raise ConfigurationError(f"approach {approach.value!r} is not part of {scenario.value} (allowed: {allowed})")


def master_seed(cfg: ExperimentConfig) -> int:
    return cfg.harness.seed


def pools_for(cfg: ExperimentConfig) -> StatePools:
    return build_pools(cfg.pools, master_seed(cfg))


def evaluation_states(cfg: ExperimentConfig, pools: StatePools) -> Tuple[PendulumState, ...]:
    n = cfg.pools.test_subsample
    if n is None and cfg.harness.scale == Scale.desk:
        n = min(DESK_TEST_SUBSAMPLE, len(pools.test))
    return test_subsample(pools.test, n)


def device_for(cfg: ExperimentConfig, agent: AgentSpec, variation: Optional[VariationMode]) -> DeviceConfig:
    update = {"seed": agent.device_seed}
    if variation is not None:
        update["variation"] = variation
    return cfg.device.model_copy(update=update)


def standard_env(cfg: ExperimentConfig) -> PendulumEnv:
    return PendulumEnv(cfg.pendulum)


def varied_env(cfg: ExperimentConfig, agent: AgentSpec) -> PendulumEnv:
    return standard_env(cfg).varied(agent.mass_pct, agent.length_pct)


def separate_agent(
    weights: SeparateNetWeights,
    training: ResolvedTraining,
    device: DeviceConfig,
    keys: Sequence[int],
    *,
    frozen: bool = False,
) -> SeparateAgent:
    """Agent on a fresh store; frozen agents (tests) keep the weights in software."""
    if frozen or training.update_rule == UpdateRule.exact:
        store = SoftwareWeights(weights, device.w_max)
    else:
        store = make_store(weights, training.update_rule, device, make_rng(device.seed, Stream.device))
    hw = HardwareRng.for_device(device, *keys, Stream.hardware_rng) if training.hardware_readout else None
    return SeparateAgent(store, training, device, make_rng(*keys, Stream.trials), hw)


def evaluate_separate(
    weights: SeparateNetWeights,
    env: PendulumEnv,
    states: Sequence[PendulumState],
    training: ResolvedTraining,
    device: DeviceConfig,
    keys: Sequence[int],
) -> List[TrialRecord]:
    """Frozen test with a fresh test stream, so two evaluations of equal weights agree."""
    agent = separate_agent(weights, training, device, (*keys, Stream.test), frozen=True)
    return evaluate(agent, env, states)


# ----------------------------
# Complete-information scenario
# ----------------------------

@dataclass
class ApproachOutcome:
    approach: Approach
    variation: VariationMode
    variable_dr: bool
    run: TrainingRun
    metrics: Dict[int, MetricsRecord]
    tests: Dict[int, List[TrialRecord]]


@dataclass
class CompleteInfoResult:
    agent: AgentSpec
    pretrained_weights: SeparateNetWeights
    pretrain_run: TrainingRun
    pretrained_t2f: float
    pretrained_tests: List[TrialRecord]
    outcomes: List[ApproachOutcome] = field(default_factory=list)


def pretrain_separate(cfg: ExperimentConfig, agent: AgentSpec, pools: StatePools) -> Tuple[SeparateNetWeights, TrainingRun]:
    """Baseline rule in software on the standard pendulum until C_pre successes."""
    training = pretrain_as_training(cfg.pretrain)
    keys = (master_seed(cfg), agent.weight_seed)
    init = random_separate_weights(make_rng(*keys, Stream.weights), training.init_scale)
    pre_agent = separate_agent(init, training, cfg.device, keys)
    run = train_until_criterion(pre_agent, standard_env(cfg), pools.pretrain)
    return pre_agent.store.snapshot(), run


def retrain_complete(
    cfg: ExperimentConfig,
    agent: AgentSpec,
    approach: Approach,
    pretrained: SeparateNetWeights,
    pretrained_t2f: float,
    pools: StatePools,
    test_states: Sequence[PendulumState],
    *,
    milestones: Sequence[int] = (),
    variable_dr: Optional[bool] = None,
    variation: Optional[VariationMode] = None,
    dump_dir: Optional[Path] = None,
) -> ApproachOutcome:
    """Re-train one approach on the agent's varied pendulum and test every milestone snapshot."""
    check_compatibility(Scenario.complete_info, approach)
    update = {"approach": approach}
    if variable_dr is not None:
        update["variable_dr"] = variable_dr
    training = resolve_training(cfg.training.model_copy(update=update))
    device = device_for(cfg, agent, variation)
    env = varied_env(cfg, agent)
    keys = (master_seed(cfg), agent.index, list(Approach).index(approach))

    if training.pretrained:
        weights, pool = pretrained, pools.retrain
    else:
        weights = random_separate_weights(make_rng(master_seed(cfg), agent.weight_seed, Stream.weights), training.init_scale)
        pool = pools.pretrain

    learner = separate_agent(weights, training, device, keys)
    run = train_until_criterion(learner, env, pool, milestones)
    if isinstance(learner.store, CrossbarWeights):
        logger.info("agent %d %s device counters: %s", agent.index, approach.value, learner.store.counters)
        if dump_dir is not None:
            learner.store.dump(dump_dir)

    metrics: Dict[int, MetricsRecord] = {}
    tests: Dict[int, List[TrialRecord]] = {}
    for c, milestone in sorted(run.milestones.items()):
        trials = evaluate_separate(milestone.weights, env, test_states, training, device, (master_seed(cfg), agent.index))
        tests[c] = trials
        metrics[c] = compute_metrics(trials, pretrained_t2f, milestone.updates_per_weight)
    return ApproachOutcome(
        approach=approach,
        variation=device.variation,
        variable_dr=training.variable_dr,
        run=run,
        metrics=metrics,
        tests=tests,
    )


def inference_tests(
    cfg: ExperimentConfig, agent: AgentSpec, weights: SeparateNetWeights, test_states: Sequence[PendulumState]
) -> List[TrialRecord]:
    """Pre-trained network on the agent's varied pendulum, software read path, weights frozen."""
    inference = resolve_training(cfg.training.model_copy(update={"approach": Approach.exact}))
    return evaluate_separate(
        weights, varied_env(cfg, agent), test_states, inference, device_for(cfg, agent, None),
        (master_seed(cfg), agent.index),
    )


def pretrain_complete(cfg: ExperimentConfig, agent: AgentSpec, pools: StatePools, test_states) -> CompleteInfoResult:
    weights, run = pretrain_separate(cfg, agent, pools)
    tests = inference_tests(cfg, agent, weights, test_states)
    pretrained_t2f = compute_metrics(tests, 0.0, 0).mean_t2f
    logger.info("agent %d pre-trained in %d trials, inference t2f %.1f", agent.index, len(run.trials), pretrained_t2f)
    return CompleteInfoResult(
        agent=agent,
        pretrained_weights=weights,
        pretrain_run=run,
        pretrained_t2f=pretrained_t2f,
        pretrained_tests=tests,
    )


# ----------------------------
# Limited-information scenario
# ----------------------------

def pretrain_limited(cfg: ExperimentConfig, agent: AgentSpec, *, progress: bool = False) -> SharedNetWeights:
    """Replay buffer of random transitions on the standard pendulum, then off-policy updates."""
    keys = (master_seed(cfg), agent.weight_seed)
    env = standard_env(cfg)
    buffer = build_replay_buffer(env, cfg.offpolicy.buffer_size, make_rng(*keys, Stream.replay, 0))
    init = random_shared_weights(make_rng(*keys, Stream.weights, 1), cfg.offpolicy.init_scale)
    return pretrain_offpolicy(
        init, buffer, env, cfg.offpolicy, make_rng(*keys, Stream.replay, 1), cfg.device.w_max, progress=progress
    )


def retrain_limited(
    cfg: ExperimentConfig,
    agent: AgentSpec,
    approach: Approach,
    pretrained: Optional[SharedNetWeights],
    k: int,
    pools: StatePools,
    test_states: Sequence[PendulumState],
    *,
    variation: Optional[VariationMode] = None,
    progress: bool = False,
) -> SynchronousRun:
    check_compatibility(Scenario.limited_info, approach)
    training = resolve_training(cfg.training.model_copy(update={"approach": approach}))
    if training.pretrained:
        if pretrained is None:
            raise ConfigurationError(f"{approach.value} re-training needs pre-trained weights")
        weights = pretrained
    else:
        weights = random_shared_weights(
            make_rng(master_seed(cfg), agent.weight_seed, Stream.weights, 1), cfg.offpolicy.init_scale
        )
    return retrain_synchronous(
        weights,
        k,
        standard_env(cfg),
        pools.retrain,
        test_states,
        cfg.synchronous,
        device_for(cfg, agent, variation),
        rule=training.update_rule,
        hardware_readout=training.hardware_readout,
        seed_keys=(master_seed(cfg), agent.index, k),
        progress=progress,
    )


def evaluate_limited(
    cfg: ExperimentConfig,
    agent: AgentSpec,
    weights: SharedNetWeights,
    test_states: Sequence[PendulumState],
    hardware_readout: bool = False,
) -> List[int]:
    keys = (master_seed(cfg), agent.index, Stream.test)
    device = device_for(cfg, agent, None)
    policy = SharedPolicy(
        device,
        hardware_readout,
        make_rng(*keys),
        HardwareRng.for_device(device, *keys) if hardware_readout else None,
    )
    return evaluate_shared(weights, standard_env(cfg), test_states, policy)


# ----------------------------
# Whole procedure
# ----------------------------

@dataclass
class PhaseResult:
    name: str
    weights: SeparateNetWeights | SharedNetWeights
    metrics: MetricsRecord
    checkpoint: Optional[Path] = None


def two_fold_procedure(
    scenario: Scenario,
    cfg: ExperimentConfig,
    agent: AgentSpec,
    *,
    approach: Optional[Approach] = None,
    learners: Optional[int] = None,
    out_dir: Optional[Path] = None,
) -> List[PhaseResult]:
    """
    complete_info: separate nets pre-trained in software, re-trained on the varied pendulum.
    limited_info: shared net pre-trained off-policy, re-trained by synchronous learners.

    Returns one PhaseResult per phase boundary; checkpoints are written when out_dir is given.
    """
    approach = approach or cfg.training.approach
    check_compatibility(scenario, approach)
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    phases: List[PhaseResult] = []

    def _save(name: str, weights) -> Optional[Path]:
        if out_dir is None:
            return None
        return save_checkpoint(Path(out_dir) / f"{name}_weights.txt", weights)

    if scenario == Scenario.complete_info:
        pre = pretrain_complete(cfg, agent, pools, tests)
        phases.append(
            PhaseResult("pretrain", pre.pretrained_weights, compute_metrics(pre.pretrained_tests, pre.pretrained_t2f, 0),
                        _save("pretrain", pre.pretrained_weights))
        )
        outcome = retrain_complete(cfg, agent, approach, pre.pretrained_weights, pre.pretrained_t2f, pools, tests)
        c = cfg.training.stop_C
        final = outcome.run.milestones[c].weights
        phases.append(PhaseResult("retrain", final, outcome.metrics[c], _save("retrain", final)))
        return phases

    k = learners or cfg.synchronous.learners
    training = resolve_training(cfg.training.model_copy(update={"approach": approach}))
    pretrained = pretrain_limited(cfg, agent) if training.pretrained else None
    if pretrained is not None:
        t2f = evaluate_limited(cfg, agent, pretrained, tests, training.hardware_readout)
        inference = sum(t2f) / len(t2f)
        phases.append(
            PhaseResult("pretrain", pretrained, MetricsRecord(inference, 0.0, 0.0), _save("pretrain", pretrained))
        )
    else:
        inference = 0.0
    sync = retrain_limited(cfg, agent, approach, pretrained, k, pools, tests)
    last = sync.checkpoints[-1]
    metrics = MetricsRecord(
        mean_t2f=last.mean_t2f,
        updates_per_weight=float(sync.updates_per_weight),
        efficiency=efficiency(last.mean_t2f, inference, sync.updates_per_weight),
    )
    phases.append(PhaseResult("retrain", sync.weights, metrics, _save("retrain", sync.weights)))
    return phases

