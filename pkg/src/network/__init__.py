"""Actor-critic networks: forward passes, TD error, gradients, checkpoints."""

from src.network.checkpoint import load_checkpoint, save_checkpoint
from src.network.forward import (
    OUTPUT_SLOPE,
    PROB_EPS,
    ForwardTrace,
    action_forward,
    clamp_probability,
    eval_forward,
    log_policy,
    shared_forward,
    sigmoid,
    td_error,
)
from src.network.gradients import (
    SharedGradients,
    separate_net_gradients,
    shared_net_gradients,
    shared_rate_delta,
    sum_gradients,
)
from src.network.weights import (
    SeparateNetWeights,
    SharedNetWeights,
    random_separate_weights,
    random_shared_weights,
)

__all__ = [
    "OUTPUT_SLOPE",
    "PROB_EPS",
    "ForwardTrace",
    "SeparateNetWeights",
    "SharedGradients",
    "SharedNetWeights",
    "action_forward",
    "clamp_probability",
    "eval_forward",
    "load_checkpoint",
    "log_policy",
    "random_separate_weights",
    "random_shared_weights",
    "save_checkpoint",
    "separate_net_gradients",
    "shared_forward",
    "shared_net_gradients",
    "shared_rate_delta",
    "sigmoid",
    "sum_gradients",
    "td_error",
]
