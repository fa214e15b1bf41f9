from __future__ import annotations

import math

import pytest

from src.errors import ConfigurationError, DivergedIntegrationError
from src.pendulum import (
    Action,
    PendulumEnv,
    PendulumState,
    build_pools,
    mechanical_energy,
    normalize_state,
    reward,
    rk4_step,
    sample_initial_state,
    step,
    with_variation,
    wrap_angle,
)
from src.schema import PendulumConfig, PoolConfig
from src.seeding import make_rng


def _mirror(s: PendulumState) -> PendulumState:
    return PendulumState(-s.theta, -s.theta_dot, -s.alpha, -s.alpha_dot)


@pytest.mark.parametrize(
    "alpha, expected",
    [
        (0.0, 0),
        (math.radians(9.999), 0),
        (math.radians(-9.999), 0),
        (math.radians(10.001), -1),
        (math.radians(-10.001), -1),
        (2 * math.pi + 0.05, 0),
        (math.pi, -1),
    ],
)
def test_reward_region(alpha, expected):
    assert reward(PendulumState(alpha=alpha)) == expected


def test_wrap_angle_range():
    for a in (-7.0, -math.pi, 0.0, math.pi, 3 * math.pi + 0.1, 100.0):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


def test_normalize_maps_bounds_to_one():
    cfg = PendulumConfig()
    x = normalize_state(PendulumState(math.pi, 4 * math.pi, math.radians(10.0), 4 * math.pi), cfg.bounds)
    assert x.tolist() == pytest.approx([1.0, 1.0, 1.0, 1.0, 1.0])
    assert normalize_state(PendulumState(), cfg.bounds).tolist() == [0.0, 0.0, 0.0, 0.0, 1.0]


def test_normalize_rejects_nonpositive_bound():
    with pytest.raises(ConfigurationError):
        normalize_state(PendulumState(), (0.0, 1.0, 1.0, 1.0))


def test_upright_rest_is_an_equilibrium(frictionless):
    s = rk4_step(PendulumState(), 0.0, 0.02, frictionless)
    assert s.as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_free_pendulum_falls_away_from_upright(frictionless):
    s = PendulumState(alpha=math.radians(5.0))
    previous = abs(s.alpha)
    for _ in range(10):
        s = rk4_step(s, 0.0, 0.02, frictionless)
        assert abs(s.alpha) > previous
        previous = abs(s.alpha)


def test_energy_is_conserved_without_damping_or_torque(frictionless):
    s = PendulumState(theta_dot=0.5, alpha=0.3, alpha_dot=-0.2)
    e0 = mechanical_energy(s, frictionless)
    for _ in range(100):
        s = rk4_step(s, 0.0, 0.01, frictionless)
    assert mechanical_energy(s, frictionless) == pytest.approx(e0, rel=1e-3, abs=1e-4)


def test_energy_tracks_a_fine_step_reference_while_upright():
    # episodes end at the upright limit
    cfg = PendulumConfig()
    rng = make_rng(21)
    for _ in range(30):
        coarse = fine = PendulumState(
            theta_dot=float(rng.uniform(-0.5, 0.5)),
            alpha=float(rng.uniform(-0.15, 0.15)),
            alpha_dot=float(rng.uniform(-0.5, 0.5)),
        )
        scale = abs(mechanical_energy(coarse, cfg))
        for _ in range(200):
            if abs(coarse.alpha) >= cfg.upright_limit:
                break
            torque = cfg.push_torque if rng.random() < 0.5 else -cfg.push_torque
            coarse = rk4_step(coarse, torque, cfg.dt, cfg)
            for _ in range(100):
                fine = rk4_step(fine, torque, cfg.dt / 100, cfg)
            gap = abs(mechanical_energy(coarse, cfg) - mechanical_energy(fine, cfg))
            assert gap < 1e-3 * scale


def test_damping_dissipates_energy():
    cfg = PendulumConfig(arm_viscous_damping=0.05, pendulum_viscous_damping=0.05)
    s = PendulumState(theta_dot=1.0, alpha=math.pi - 0.3)
    e0 = mechanical_energy(s, cfg)
    for _ in range(50):
        s = rk4_step(s, 0.0, 0.01, cfg)
    assert mechanical_energy(s, cfg) < e0


def test_mirror_symmetry():
    cfg = PendulumConfig()
    s = PendulumState(0.2, -0.4, math.radians(3.0), 0.7)
    nxt, r, failed = step(s, Action.CCW, cfg)
    mirrored, r_m, failed_m = step(_mirror(s), Action.CW, cfg)
    assert mirrored.as_tuple() == pytest.approx(_mirror(nxt).as_tuple(), abs=1e-12)
    assert (r, failed) == (r_m, failed_m)


def test_step_is_deterministic():
    cfg = PendulumConfig()
    s = PendulumState(0.1, 0.2, 0.03, -0.1)
    assert step(s, Action.CW, cfg) == step(s, Action.CW, cfg)


def test_push_direction():
    cfg = PendulumConfig()
    ccw, _, _ = step(PendulumState(), Action.CCW, cfg)
    cw, _, _ = step(PendulumState(), Action.CW, cfg)
    assert ccw.theta_dot > 0 > cw.theta_dot


def test_leaving_the_upright_region_fails():
    s = PendulumState(alpha=math.radians(9.9), alpha_dot=3.0)
    nxt, r, failed = step(s, Action.CCW, PendulumConfig())
    assert abs(nxt.alpha) > math.radians(10.0)
    assert (r, failed) == (-1, True)


def test_non_finite_state_raises():
    with pytest.raises(DivergedIntegrationError):
        step(PendulumState(alpha=float("nan")), Action.CW, PendulumConfig())


def test_with_variation_scales_mass_and_length():
    cfg = PendulumConfig()
    varied = with_variation(cfg, 10, -5)
    assert varied.pendulum_mass == pytest.approx(0.127 * 1.1)
    assert varied.pendulum_length == pytest.approx(0.3365 * 0.95)
    assert varied.arm_mass == cfg.arm_mass
    assert PendulumEnv(cfg).varied(10, -5).config == varied


def test_pools_are_deterministic_and_inside_the_start_region():
    cfg = PoolConfig(pretrain_size=30, retrain_size=20, test_size=10)
    a = build_pools(cfg, 7)
    b = build_pools(cfg, 7)
    assert a == b
    assert (len(a.pretrain), len(a.retrain), len(a.test)) == (30, 20, 10)
    for s in a.pretrain + a.retrain + a.test:
        assert s.theta == 0.0 and s.theta_dot == 0.0
        assert abs(s.alpha) <= math.radians(cfg.initial_alpha_max_deg)
        assert reward(s) == 0
    assert build_pools(cfg, 8).test != a.test


def test_sample_from_empty_pool_raises():
    with pytest.raises(ConfigurationError):
        sample_initial_state(make_rng(0), ())
