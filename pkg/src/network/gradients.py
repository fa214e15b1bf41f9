"""Weight deltas: the sign-heuristic rule of the separate nets and true backprop for the shared net."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from src.network.forward import OUTPUT_SLOPE, ForwardTrace
from src.network.weights import SeparateNetWeights, SharedNetWeights
from src.schema import LearningRates, SharedLearningRates


def separate_net_gradients(
    weights: SeparateNetWeights,
    trace_eval: ForwardTrace,
    trace_action: ForwardTrace,
    delta: float,
    q: int,
    rates: LearningRates,
) -> SeparateNetWeights:
    """
    Rate-scaled deltas (a, c, d, f) of the separate nets.

    The hidden layers use sgn(c_i) / sgn(f_i) in place of the output weight itself,
    so this is not the exact gradient.
    """
    y = trace_eval.hidden
    z = trace_action.hidden
    x = trace_eval.x
    pq = q - trace_action.prob

    dc = rates.beta * delta * y
    da = rates.beta_h * delta * np.outer(y * (1.0 - y) * np.sign(weights.c), x)
    df = rates.rho * delta * pq * z
    dd = rates.rho_h * delta * pq * np.outer(z * (1.0 - z) * np.sign(weights.f), trace_action.x)
    return SeparateNetWeights(a=da, c=dc, d=dd, f=df)


@dataclass(eq=False)
class SharedGradients:
    """importance * delta * grad V (value_*) and importance * delta * grad log pi (policy_*)."""

    value_in: np.ndarray
    value_out: np.ndarray
    policy_in: np.ndarray
    policy_out: np.ndarray

    def __add__(self, other: "SharedGradients") -> "SharedGradients":
        return SharedGradients(
            value_in=self.value_in + other.value_in,
            value_out=self.value_out + other.value_out,
            policy_in=self.policy_in + other.policy_in,
            policy_out=self.policy_out + other.policy_out,
        )

    def scaled(self, factor: float) -> "SharedGradients":
        return SharedGradients(
            value_in=factor * self.value_in,
            value_out=factor * self.value_out,
            policy_in=factor * self.policy_in,
            policy_out=factor * self.policy_out,
        )

    @classmethod
    def zeros_like(cls, weights: SharedNetWeights) -> "SharedGradients":
        return cls(
            value_in=np.zeros_like(weights.w_in),
            value_out=np.zeros_like(weights.w_v),
            policy_in=np.zeros_like(weights.w_in),
            policy_out=np.zeros_like(weights.w_p),
        )


def value_gradient(weights: SharedNetWeights, trace: ForwardTrace) -> tuple[np.ndarray, np.ndarray]:
    """(dV/dw_in, dV/dw_v)."""
    h = trace.hidden
    return np.outer(weights.w_v * h * (1.0 - h), trace.x), h.copy()


def log_policy_gradient(
    weights: SharedNetWeights, trace: ForwardTrace, q: int
) -> tuple[np.ndarray, np.ndarray]:
    """(dlog pi/dw_in, dlog pi/dw_p); the Bernoulli output gives slope * (q - p) at the pre-activation."""
    h = trace.hidden
    g_out = OUTPUT_SLOPE * (q - trace.prob)
    return g_out * np.outer(weights.w_p * h * (1.0 - h), trace.x), g_out * h


def shared_net_gradients(
    weights: SharedNetWeights,
    trace: ForwardTrace,
    delta: float,
    q: int,
    importance: float = 1.0,
) -> SharedGradients:
    scale = importance * delta
    v_in, v_out = value_gradient(weights, trace)
    p_in, p_out = log_policy_gradient(weights, trace, q)
    return SharedGradients(
        value_in=scale * v_in,
        value_out=scale * v_out,
        policy_in=scale * p_in,
        policy_out=scale * p_out,
    )


def sum_gradients(grads: Iterable[SharedGradients]) -> SharedGradients:
    """Sum in iteration order (fixed order keeps the float result reproducible)."""
    it = iter(grads)
    total = next(it)
    for g in it:
        total = total + g
    return total


def shared_rate_delta(grads: SharedGradients, rates: SharedLearningRates) -> SharedNetWeights:
    """Weight deltas; w_in collects both the value and the policy path."""
    return SharedNetWeights(
        w_in=rates.value_hidden * grads.value_in + rates.policy_hidden * grads.policy_in,
        w_v=rates.value_out * grads.value_out,
        w_p=rates.policy_out * grads.policy_out,
    )
