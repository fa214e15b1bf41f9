"""Rotary (Furuta) pendulum: Euler-Lagrange dynamics, RK4 step, reward and input normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence, Tuple

import numpy as np

from src.errors import ConfigurationError, DivergedIntegrationError
from src.schema import PendulumConfig


class Action(IntEnum):
    """One fixed push per step; there is no "no push"."""

    CW = 0
    CCW = 1


@dataclass(frozen=True, slots=True)
class PendulumState:
    """Arm angle/velocity and pendulum angle/velocity; alpha = 0 is upright, stored unwrapped."""

    theta: float = 0.0
    theta_dot: float = 0.0
    alpha: float = 0.0
    alpha_dot: float = 0.0

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.theta, self.theta_dot, self.alpha, self.alpha_dot)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.as_tuple())


def wrap_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2 * math.pi
    return wrapped - math.pi


def torque_for(action: Action | int, config: PendulumConfig) -> float:
    return config.push_torque if int(action) == Action.CCW else -config.push_torque


# ----------------------------
# Equations of motion
# ----------------------------

def _inertias(config: PendulumConfig) -> Tuple[float, float, float, float]:
    # pendulum: uniform rod about its pivot; arm: uniform rod about the motor shaft
    m = config.pendulum_mass
    half = 0.5 * config.pendulum_length
    j_pend = m * config.pendulum_length ** 2 / 3.0
    j_arm = config.arm_mass * config.arm_length ** 2 / 3.0
    return m, half, j_pend, j_arm


def derivatives(
    state: Sequence[float], torque: float, config: PendulumConfig
) -> Tuple[float, float, float, float]:
    """Time derivative (theta_dot, theta_ddot, alpha_dot, alpha_ddot) of the Furuta pendulum."""
    _, theta_dot, alpha, alpha_dot = state
    m, half, j_pend, j_arm = _inertias(config)
    r = config.arm_length

    sin_a = math.sin(alpha)
    cos_a = math.cos(alpha)

    m11 = j_arm + m * r * r + j_pend * sin_a * sin_a
    m12 = -m * r * half * cos_a
    m22 = j_pend

    rhs1 = (
        torque
        - config.arm_viscous_damping * theta_dot
        - 2.0 * j_pend * sin_a * cos_a * theta_dot * alpha_dot
        - m * r * half * sin_a * alpha_dot * alpha_dot
    )
    rhs2 = (
        j_pend * sin_a * cos_a * theta_dot * theta_dot
        + m * config.gravity * half * sin_a
        - config.pendulum_viscous_damping * alpha_dot
    )

    det = m11 * m22 - m12 * m12
    theta_ddot = (m22 * rhs1 - m12 * rhs2) / det
    alpha_ddot = (m11 * rhs2 - m12 * rhs1) / det
    return theta_dot, theta_ddot, alpha_dot, alpha_ddot


def mechanical_energy(state: PendulumState, config: PendulumConfig) -> float:
    """Kinetic plus potential energy in joules (potential measured from the pivot)."""
    m, half, j_pend, j_arm = _inertias(config)
    r = config.arm_length
    sin_a = math.sin(state.alpha)
    cos_a = math.cos(state.alpha)
    m11 = j_arm + m * r * r + j_pend * sin_a * sin_a
    m12 = -m * r * half * cos_a
    kinetic = (
        0.5 * m11 * state.theta_dot ** 2
        + m12 * state.theta_dot * state.alpha_dot
        + 0.5 * j_pend * state.alpha_dot ** 2
    )
    return kinetic + m * config.gravity * half * cos_a


def rk4_step(state: PendulumState, torque: float, dt: float, config: PendulumConfig) -> PendulumState:
    """One classical Runge-Kutta step with the torque held constant."""
    y = state.as_tuple()
    k1 = derivatives(y, torque, config)
    k2 = derivatives(tuple(y[i] + 0.5 * dt * k1[i] for i in range(4)), torque, config)
    k3 = derivatives(tuple(y[i] + 0.5 * dt * k2[i] for i in range(4)), torque, config)
    k4 = derivatives(tuple(y[i] + dt * k3[i] for i in range(4)), torque, config)
    out = tuple(y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(4))
    return PendulumState(*out)


# ----------------------------
# Reward / normalization
# ----------------------------

def reward(state: PendulumState, config: PendulumConfig | None = None) -> int:
    """0 while the wrapped pendulum angle is strictly inside the upright region, else -1."""
    limit = config.upright_limit if config is not None else math.radians(10.0)
    return 0 if abs(wrap_angle(state.alpha)) < limit else -1


def normalize_state(state: PendulumState, bounds: Sequence[float]) -> np.ndarray:
    """Network input [theta, theta_dot, alpha, alpha_dot] / maxima plus a constant bias of 1."""
    if any(b <= 0 for b in bounds):
        raise ConfigurationError("normalization bounds must be strictly positive")
    theta_max, theta_dot_max, alpha_max, alpha_dot_max = bounds
    return np.array(
        [
            state.theta / theta_max,
            state.theta_dot / theta_dot_max,
            state.alpha / alpha_max,
            state.alpha_dot / alpha_dot_max,
            1.0,
        ],
        dtype=np.float64,
    )


def step(
    state: PendulumState, action: Action | int, config: PendulumConfig
) -> Tuple[PendulumState, int, bool]:
    """Advance dt seconds under one push; the reward is taken on the new state."""
    nxt = rk4_step(state, torque_for(action, config), config.dt, config)
    if not nxt.is_finite():
        raise DivergedIntegrationError(f"non-finite pendulum state after step from {state.as_tuple()}")
    r = reward(nxt, config)
    return nxt, r, r == -1


def with_variation(config: PendulumConfig, mass_pct: float, length_pct: float) -> PendulumConfig:
    """Pendulum with its mass and length scaled by the given percentages."""
    if mass_pct <= -100 or length_pct <= -100:
        raise ConfigurationError("variation must keep mass and length positive")
    return config.model_copy(
        update={
            "pendulum_mass": config.pendulum_mass * (1.0 + mass_pct / 100.0),
            "pendulum_length": config.pendulum_length * (1.0 + length_pct / 100.0),
        }
    )


@dataclass(frozen=True)
class PendulumEnv:
    """Immutable environment bound to one validated pendulum configuration."""

    config: PendulumConfig

    def step(self, state: PendulumState, action: Action | int) -> Tuple[PendulumState, int, bool]:
        return step(state, action, self.config)

    def reward(self, state: PendulumState) -> int:
        return reward(state, self.config)

    def normalize(self, state: PendulumState) -> np.ndarray:
        return normalize_state(state, self.config.bounds)

    def energy(self, state: PendulumState) -> float:
        return mechanical_energy(state, self.config)

    @property
    def max_steps(self) -> int:
        return self.config.max_steps

    def varied(self, mass_pct: float, length_pct: float) -> "PendulumEnv":
        return PendulumEnv(with_variation(self.config, mass_pct, length_pct))
