"""Training loops: on-policy trials, variable discount rate, off-policy pre-training, synchronous learners."""

from src.training.discount import DiscountState, adjust_discount_rate
from src.training.offpolicy import (
    Experience,
    ReplayBuffer,
    build_replay_buffer,
    importance_ratio,
    pretrain_offpolicy,
)
from src.training.records import CheckpointRecord, Milestone, SynchronousRun, TrainingRun, TrialRecord
from src.training.synchronous import (
    Learner,
    SharedPolicy,
    aggregate_gradients,
    evaluate_shared,
    global_delta,
    retrain_synchronous,
)
from src.training.trial import Mode, SeparateAgent, evaluate, pq_gate, run_trial, train_until_criterion

__all__ = [
    "CheckpointRecord",
    "DiscountState",
    "Experience",
    "Learner",
    "Milestone",
    "Mode",
    "ReplayBuffer",
    "SeparateAgent",
    "SharedPolicy",
    "SynchronousRun",
    "TrainingRun",
    "TrialRecord",
    "adjust_discount_rate",
    "aggregate_gradients",
    "build_replay_buffer",
    "evaluate",
    "evaluate_shared",
    "global_delta",
    "importance_ratio",
    "pq_gate",
    "pretrain_offpolicy",
    "retrain_synchronous",
    "run_trial",
    "train_until_criterion",
]
