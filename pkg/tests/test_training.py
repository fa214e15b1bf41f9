from __future__ import annotations

import math

import numpy as np
import pytest

from src.device.store import SoftwareWeights
from src.network.forward import action_forward, shared_forward, td_error
from src.network.gradients import shared_net_gradients, shared_rate_delta
from src.network.weights import SharedNetWeights, random_separate_weights, random_shared_weights
from src.pendulum import Action, PendulumEnv, PendulumState, build_pools, sample_initial_state
from src.schema import (
    Approach,
    DeviceConfig,
    OffPolicyConfig,
    PendulumConfig,
    PoolConfig,
    SharedLearningRates,
    SynchronousConfig,
    TrainingConfig,
    UpdateRule,
    resolve_training,
)
from src.seeding import Stream, make_rng
from src.training import (
    DiscountState,
    Mode,
    SeparateAgent,
    adjust_discount_rate,
    aggregate_gradients,
    build_replay_buffer,
    evaluate,
    global_delta,
    importance_ratio,
    pq_gate,
    pretrain_offpolicy,
    retrain_synchronous,
    run_trial,
    train_until_criterion,
)
from src.training.synchronous import make_learners

SHORT = PendulumConfig(max_steps=40)
START = PendulumState(alpha=math.radians(2.0))


def _agent(approach: Approach = Approach.exact, seed: int = 0, **overrides) -> SeparateAgent:
    training = resolve_training(TrainingConfig(approach=approach, **overrides))
    weights = random_separate_weights(make_rng(seed, 1), 0.3)
    return SeparateAgent(SoftwareWeights(weights, 3.0), training, DeviceConfig(), make_rng(seed, 2))


def _small_pools():
    return build_pools(PoolConfig(pretrain_size=10, retrain_size=10, test_size=5), 1)


# ----------------------------
# PQ gate / discount rate
# ----------------------------

@pytest.mark.parametrize(
    "p, q, threshold, expected",
    [
        (0.02, 1, 0.95, True),
        (0.5, 1, 0.95, False),
        (0.97, 0, 0.95, True),
        (0.9, 0, 0.9, False),
    ],
)
def test_pq_gate(p, q, threshold, expected):
    assert pq_gate(p, q, threshold) is expected


def test_pq_gate_admits_fewer_updates_as_the_threshold_rises():
    rng = make_rng(31)
    w = random_separate_weights(make_rng(30), 0.5)
    trace = []
    for _ in range(500):
        p = action_forward(w, np.append(rng.uniform(-1, 1, size=4), 1.0)).prob
        trace.append((p, int(rng.random() < p)))

    counts = [sum(pq_gate(p, q, th) for p, q in trace) for th in np.linspace(0.0, 1.0, 21)]
    assert counts[0] == len(trace)
    assert counts[-1] == 0
    assert all(later <= earlier for earlier, later in zip(counts, counts[1:]))


def _window(successes: int, size: int = 50):
    return [True] * successes + [False] * (size - successes)


def test_discount_rate_first_move_is_up():
    state = adjust_discount_rate(_window(10), 1000.0, DiscountState(gamma=0.75))
    assert state.gamma == pytest.approx(0.77)
    assert (state.direction, state.adjustments) == (1, 1)


def test_discount_rate_keeps_direction_while_improving_and_reverses_otherwise():
    s = DiscountState(gamma=0.77, direction=1, last_mean_t2f=1000.0, adjustments=1)
    better = adjust_discount_rate(_window(10), 1200.0, s)
    assert better.gamma == pytest.approx(0.79) and better.direction == 1
    worse = adjust_discount_rate(_window(10), 900.0, s)
    assert worse.gamma == pytest.approx(0.75) and worse.direction == -1


def test_discount_rate_holds_above_the_success_threshold():
    s = DiscountState(gamma=0.8)
    assert adjust_discount_rate(_window(20), 10.0, s) is s


def test_discount_rate_is_clamped():
    s = DiscountState(gamma=0.98, direction=1, last_mean_t2f=10.0)
    assert adjust_discount_rate(_window(0), 20.0, s).gamma == 0.99
    low = DiscountState(gamma=0.5, direction=-1, last_mean_t2f=10.0)
    assert adjust_discount_rate(_window(0), 20.0, low).gamma == 0.5


def test_discount_rate_window_length_is_checked():
    with pytest.raises(ValueError):
        adjust_discount_rate(_window(10, 49), 1.0, DiscountState(gamma=0.8))


# ----------------------------
# Trials
# ----------------------------

def test_test_mode_never_updates():
    agent = _agent()
    before = agent.store.snapshot()
    rec = run_trial(agent, PendulumEnv(SHORT), START, Mode.test)
    assert rec.updates_applied == 0
    for name in before.layer_order:
        np.testing.assert_array_equal(getattr(agent.weights, name), getattr(before, name))


def test_exact_rule_updates_every_step():
    agent = _agent()
    rec = run_trial(agent, PendulumEnv(SHORT), START, Mode.train)
    assert 1 <= rec.steps_survived <= SHORT.max_steps
    assert rec.updates_applied == rec.steps_survived
    assert not rec.success or rec.steps_survived == SHORT.max_steps


def test_pq_gate_can_block_every_update():
    agent = _agent(Approach.exact_pq, pq_threshold=0.999999)
    before = agent.store.snapshot()
    rec = run_trial(agent, PendulumEnv(SHORT), START, Mode.train)
    assert rec.updates_applied == 0
    np.testing.assert_array_equal(agent.weights.f, before.f)


def test_trials_are_reproducible():
    a = run_trial(_agent(seed=4), PendulumEnv(SHORT), START)
    b = run_trial(_agent(seed=4), PendulumEnv(SHORT), START)
    assert a == b


def test_hardware_readout_requires_a_hardware_rng():
    training = resolve_training(TrainingConfig(approach=Approach.manhattan_pq))
    with pytest.raises(ValueError):
        SeparateAgent(SoftwareWeights(random_separate_weights(make_rng(0)), 3.0), training, DeviceConfig(), make_rng(0))


def test_evaluate_uses_every_state_once():
    states = _small_pools().test
    records = evaluate(_agent(), PendulumEnv(SHORT), states)
    assert len(records) == len(states)
    assert all(r.updates_applied == 0 for r in records)


def test_train_until_criterion_stops_at_max_trials_and_reports_milestones():
    agent = _agent(max_trials=3)
    run = train_until_criterion(agent, PendulumEnv(SHORT), _small_pools().retrain, milestones=(1, 2))
    assert len(run.trials) <= 3
    assert set(run.milestones) == {1, 2, 50}
    assert run.updates_per_weight == sum(t.updates_applied for t in run.trials)
    for c, m in run.milestones.items():
        assert m.reached == (run.successes >= c)


# ----------------------------
# Off-policy pre-training
# ----------------------------

def test_importance_ratio():
    assert importance_ratio(0.8, 1) == pytest.approx(1.6)
    assert importance_ratio(0.8, 0) == pytest.approx(0.4)
    assert importance_ratio(0.8, 1, behavior_prob=0.8) == pytest.approx(1.0)


def test_on_policy_samples_get_unit_importance():
    rng = make_rng(32)
    for _ in range(100):
        w = random_shared_weights(rng, 0.3)
        trace = shared_forward(w, np.append(rng.uniform(-1, 1, size=4), 1.0))
        delta = float(rng.normal())
        for a in (0, 1):
            rho = importance_ratio(trace.prob, a, behavior_prob=trace.prob)
            assert rho == 1.0
            weighted = shared_net_gradients(w, trace, delta, a, rho)
            plain = shared_net_gradients(w, trace, delta, a, 1.0)
            np.testing.assert_array_equal(weighted.value_in, plain.value_in)
            np.testing.assert_array_equal(weighted.policy_out, plain.policy_out)


def test_importance_weighting_recovers_the_on_policy_expectation():
    rng = make_rng(33)
    for _ in range(100):
        w = random_shared_weights(rng, 0.3)
        trace = shared_forward(w, np.append(rng.uniform(-1, 1, size=4), 1.0))
        # the TD error depends on where the action leads
        delta = {0: float(rng.normal()), 1: float(rng.normal())}
        behavior = float(rng.uniform(0.05, 0.95))
        pi = {1: trace.prob, 0: 1.0 - trace.prob}
        b = {1: behavior, 0: 1.0 - behavior}

        on_policy = sum(pi[a] * shared_net_gradients(w, trace, delta[a], a).policy_out for a in (0, 1))
        off_policy = sum(
            b[a] * shared_net_gradients(w, trace, delta[a], a, importance_ratio(trace.prob, a, behavior)).policy_out
            for a in (0, 1)
        )
        np.testing.assert_allclose(off_policy, on_policy, rtol=1e-12, atol=1e-13)


def test_replay_buffer_contents():
    env = PendulumEnv(PendulumConfig())
    buf = build_replay_buffer(env, 60, make_rng(1))
    assert len(buf) == 60
    assert set(np.unique(buf.rewards)) <= {0, -1}
    assert np.all(np.abs(buf.states[:, 2]) < env.config.upright_limit)
    e = buf[0]
    assert env.step(e.s, e.a)[0] == e.s_next
    x, x_next = buf.normalized(env)
    assert x.shape == (60, 5) and np.all(x[:, 4] == 1.0)


def test_offpolicy_pretraining_returns_finite_weights():
    env = PendulumEnv(PendulumConfig())
    buf = build_replay_buffer(env, 40, make_rng(2))
    init = random_shared_weights(make_rng(3), 0.3)
    out = pretrain_offpolicy(init, buf, env, OffPolicyConfig(samples=30), make_rng(4), 3.0)
    assert isinstance(out, SharedNetWeights)
    assert all(np.all(np.isfinite(v)) and np.all(np.abs(v) <= 3.0) for v in out.layers().values())
    assert not np.array_equal(out.w_v, init.w_v)


# ----------------------------
# Synchronous learners
# ----------------------------

def _grads(seed: int):
    w = random_shared_weights(make_rng(seed), 0.3)
    x = np.append(make_rng(seed, 1).uniform(-1, 1, size=4), 1.0)
    return shared_net_gradients(w, shared_forward(w, x), 0.3, 1)


def test_gradient_aggregation_is_an_ordered_sum():
    g = [_grads(i) for i in range(3)]
    total = aggregate_gradients(g)
    np.testing.assert_array_equal(total.value_in, (g[0].value_in + g[1].value_in) + g[2].value_in)
    doubled = aggregate_gradients([g[0], g[0]])
    np.testing.assert_array_equal(doubled.policy_out, g[0].scaled(2.0).policy_out)
    with pytest.raises(ValueError):
        aggregate_gradients([])


def test_global_delta_applies_layer_rates():
    g = _grads(1)
    rates = SharedLearningRates()
    d = global_delta(g, rates)
    np.testing.assert_allclose(d.w_v, rates.value_out * g.value_out)
    np.testing.assert_allclose(d.w_p, rates.policy_out * g.policy_out)
    np.testing.assert_allclose(d.w_in, rates.value_hidden * g.value_in + rates.policy_hidden * g.policy_in)


def test_learners_hold_identical_weights():
    pools = _small_pools()
    env = PendulumEnv(SHORT)
    learners = make_learners(
        random_shared_weights(make_rng(0), 0.3), 4, env, pools.retrain, DeviceConfig(),
        UpdateRule.exact, False, (1, 2),
    )
    rates = SharedLearningRates()
    for _ in range(60):
        delta = global_delta(aggregate_gradients([lr.step(0.9) for lr in learners]), rates)
        for lr in learners:
            lr.store.update(delta)
    reference = learners[0].store.read()
    for lr in learners[1:]:
        for name in reference.layer_order:
            np.testing.assert_array_equal(getattr(lr.store.read(), name), getattr(reference, name))


def test_synchronous_run_checkpoints_and_counts():
    pools = _small_pools()
    cfg = SynchronousConfig(learners=2, total_samples=200, checkpoint_every=100)
    run = retrain_synchronous(
        random_shared_weights(make_rng(0), 0.3), 2, PendulumEnv(SHORT), pools.retrain, pools.test[:3],
        cfg, DeviceConfig(), seed_keys=(5,),
    )
    assert [c.samples for c in run.checkpoints] == [100, 200]
    assert [c.time_steps for c in run.checkpoints] == [50, 100]
    assert (run.samples, run.updates_per_weight) == (200, 100)
    assert run.episodes >= 2


def test_synchronous_run_is_deterministic():
    pools = _small_pools()
    cfg = SynchronousConfig(learners=2, total_samples=60, checkpoint_every=30)

    def once():
        return retrain_synchronous(
            random_shared_weights(make_rng(0), 0.3), 2, PendulumEnv(SHORT), pools.retrain, pools.test[:2],
            cfg, DeviceConfig(), seed_keys=(9,),
        )

    a, b = once(), once()
    assert a.checkpoints == b.checkpoints
    for name in a.weights.layer_order:
        np.testing.assert_array_equal(getattr(a.weights, name), getattr(b.weights, name))


def test_variable_amplitude_hardware_run():
    pools = _small_pools()
    cfg = SynchronousConfig(learners=2, total_samples=40, checkpoint_every=20)
    run = retrain_synchronous(
        random_shared_weights(make_rng(0), 0.3), 2, PendulumEnv(SHORT), pools.retrain, pools.test[:2],
        cfg, DeviceConfig(variation="pct30"), rule=UpdateRule.variable_amplitude, hardware_readout=True,
        seed_keys=(3,),
    )
    assert all(np.all(np.isfinite(v)) for v in run.weights.layers().values())
    assert set(run.device_counters) == {"saturations", "floor_skips", "half_select_disturbs", "pulses"}


def test_learner_count_is_validated():
    with pytest.raises(ValueError):
        retrain_synchronous(
            random_shared_weights(make_rng(0)), 3, PendulumEnv(SHORT), _small_pools().retrain, (),
            SynchronousConfig(), DeviceConfig(),
        )


def _sequential_actor_critic(
    weights: SharedNetWeights, env: PendulumEnv, pool, cfg: SynchronousConfig, seed_keys, steps: int, w_max: float
) -> SharedNetWeights:
    """Plain one-learner loop written out step by step."""
    rng = make_rng(*seed_keys, Stream.learners, 0)
    w = weights.copy()
    state = sample_initial_state(rng, pool)
    episode_steps = 0
    for _ in range(steps):
        trace = shared_forward(w, env.normalize(state))
        a = Action.CCW if rng.random() < trace.prob else Action.CW
        nxt, r, failed = env.step(state, a)
        episode_steps += 1
        v_next = 0.0 if failed else shared_forward(w, env.normalize(nxt)).value
        delta = td_error(r, v_next, trace.value, cfg.gamma, terminal=failed)
        d = shared_rate_delta(shared_net_gradients(w, trace, delta, int(a)), cfg.rates)
        for name in w.layer_order:
            setattr(w, name, np.clip(getattr(w, name) + getattr(d, name), -w_max, w_max))
        if failed or episode_steps >= env.max_steps:
            state = sample_initial_state(rng, pool)
            episode_steps = 0
        else:
            state = nxt
    return w


def test_single_learner_matches_a_sequential_loop_bit_for_bit():
    pools = _small_pools()
    env = PendulumEnv(PendulumConfig(max_steps=200))
    init = random_shared_weights(make_rng(0), 0.3)
    cfg = SynchronousConfig(learners=1, total_samples=10_000, checkpoint_every=10_000)
    device = DeviceConfig()

    run = retrain_synchronous(init, 1, env, pools.retrain, pools.test[:1], cfg, device, seed_keys=(12,))
    reference = _sequential_actor_critic(init, env, pools.retrain, cfg, (12,), 10_000, device.w_max)

    assert run.updates_per_weight == 10_000
    for name in reference.layer_order:
        np.testing.assert_array_equal(getattr(run.weights, name), getattr(reference, name))
