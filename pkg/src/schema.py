from __future__ import annotations

import math
import re
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python 3.10 backport with the same API
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# =========================
# Enums / core types
# =========================

class Approach(str, Enum):
    baseline = "baseline"
    exact = "exact"
    manhattan = "manhattan"
    baseline_pq = "baseline_pq"
    exact_pq = "exact_pq"
    manhattan_pq = "manhattan_pq"
    variable_amplitude = "variable_amplitude"


class UpdateRule(str, Enum):
    exact = "exact"
    manhattan = "manhattan"
    variable_amplitude = "variable_amplitude"


class VariationMode(str, Enum):
    ideal = "ideal"
    pct30 = "pct30"
    full_range = "full_range"


class Scenario(str, Enum):
    complete_info = "complete_info"
    limited_info = "limited_info"


class Scale(str, Enum):
    full = "full"
    desk = "desk"


# =========================
# Aliases / Canonicalization
# =========================

def _canon(s: str) -> str:
    s = s.strip().lower()
    s = s.replace("-", " ")
    s = s.replace("_", " ")
    s = re.sub(r"\s+", " ", s)
    return s


APPROACH_ALIASES = {
    "baseline": "baseline",
    "zero": "baseline",

    "exact": "exact",
    "pre": "exact",

    "manhattan": "manhattan",

    "baseline pq": "baseline_pq",
    "baselinepq": "baseline_pq",

    "exact pq": "exact_pq",
    "exactpq": "exact_pq",

    "manhattan pq": "manhattan_pq",
    "manhattanpq": "manhattan_pq",

    "variable amplitude": "variable_amplitude",
    "variableamplitude": "variable_amplitude",
    "va": "variable_amplitude",
}

VARIATION_ALIASES = {
    "ideal": "ideal",
    "none": "ideal",

    "pct30": "pct30",
    "30%": "pct30",
    "30% pv": "pct30",
    "30 pct": "pct30",

    "full range": "full_range",
    "fullrange": "full_range",
    "full": "full_range",
    "full range pv": "full_range",
}

SCENARIO_ALIASES = {
    "complete": "complete_info",
    "complete info": "complete_info",
    "limited": "limited_info",
    "limited info": "limited_info",
}


def parse_approach(value: Any) -> Approach:
    return Approach(APPROACH_ALIASES.get(_canon(str(value)), value))


def parse_variation(value: Any) -> VariationMode:
    return VariationMode(VARIATION_ALIASES.get(_canon(str(value)), value))


def parse_scenario(value: Any) -> Scenario:
    return Scenario(SCENARIO_ALIASES.get(_canon(str(value)), value))


# =========================
# Sections
# =========================

# Trial pools drawn for each phase; a run never asks for more trials than exist.
PRETRAIN_TRIAL_LIMIT = 7000
RETRAIN_TRIAL_LIMIT = 2000

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PendulumConfig(_Section):
    """Rotary pendulum physical parameters, step size and normalization maxima."""

    pendulum_mass: float = Field(default=0.127, gt=0)
    pendulum_length: float = Field(default=0.3365, gt=0)
    arm_mass: float = Field(default=0.257, gt=0)
    arm_length: float = Field(default=0.216, gt=0)
    gravity: float = Field(default=9.81, gt=0)
    arm_viscous_damping: float = Field(default=0.0024, ge=0)
    pendulum_viscous_damping: float = Field(default=0.0024, ge=0)
    push_torque: float = Field(default=0.1, gt=0)
    dt: float = Field(default=0.02, gt=0)

    upright_limit_deg: float = Field(default=10.0, gt=0, lt=180)
    max_steps: int = Field(default=5000, ge=1)

    theta_max: float = Field(default=math.pi, gt=0)
    theta_dot_max: float = Field(default=4 * math.pi, gt=0)
    alpha_max: float = Field(default=math.radians(10.0), gt=0)
    alpha_dot_max: float = Field(default=4 * math.pi, gt=0)

    @property
    def upright_limit(self) -> float:
        return math.radians(self.upright_limit_deg)

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.theta_max, self.theta_dot_max, self.alpha_max, self.alpha_dot_max)


class PoolConfig(_Section):
    pretrain_size: int = Field(default=7000, ge=1)
    retrain_size: int = Field(default=2000, ge=1)
    test_size: int = Field(default=500, ge=1)
    initial_alpha_max_deg: float = Field(default=5.0, gt=0)
    initial_alpha_dot_max: float = Field(default=0.1, ge=0)
    # None: the whole test pool
    test_subsample: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _inside_upright(self):
        if self.initial_alpha_max_deg >= 10.0:
            raise ValueError("initial_alpha_max_deg must stay strictly inside the 10 deg upright region")
        if self.test_subsample is not None and self.test_subsample > self.test_size:
            raise ValueError("test_subsample cannot exceed test_size")
        return self


class DeviceConfig(_Section):
    """Memristor model, variation case, programming pulses and read path."""

    variation: VariationMode = VariationMode.ideal
    seed: int = Field(default=0, ge=0)

    vth_nominal: float = Field(default=2.25, gt=0)
    pct_spread: float = Field(default=0.30, ge=0, lt=1)
    full_range_low: float = Field(default=1.0, gt=0)
    full_range_high: float = Field(default=5.5, gt=0)

    g_min: float = 0.0
    g_max: float = 1.0
    w_max: float = Field(default=3.0, gt=0)

    pulse_amplitude: float = Field(default=2.5, gt=0)
    pulse_duration: float = Field(default=1e-6, gt=0)
    v0: float = Field(default=0.25, gt=0)
    # None: calibrated so one nominal pulse moves an ideal mid-range device by calibration_step
    rate_a: Optional[float] = Field(default=None, gt=0)
    calibration_step: float = Field(default=0.01, gt=0, lt=1)

    va_pulse_duration: float = Field(default=1e-8, gt=0)
    half_select_margin: float = Field(default=0.02, ge=0, lt=1)

    adc_bits: int = Field(default=8, ge=2, le=16)
    value_full_scale: float = Field(default=2.0, gt=0)
    rng_seed: int = Field(default=0xACE1, ge=1)

    @field_validator("variation", mode="before")
    @classmethod
    def _v_variation(cls, v):
        if v is None or isinstance(v, VariationMode):
            return v
        return VARIATION_ALIASES.get(_canon(str(v)), v)

    @model_validator(mode="after")
    def _ranges(self):
        if self.g_max <= self.g_min:
            raise ValueError("g_max must be > g_min")
        if self.full_range_high <= self.full_range_low:
            raise ValueError("full_range_high must be > full_range_low")
        if self.pulse_amplitude >= 2 * self.vth_nominal:
            raise ValueError("pulse_amplitude must stay below 2 * vth_nominal")
        return self

    @property
    def rate(self) -> float:
        """Switching-rate prefactor A; rate_a when given, else the calibrated value."""
        if self.rate_a is not None:
            return self.rate_a
        window_mid = 0.5
        return self.calibration_step * (self.g_max - self.g_min) / (
            self.pulse_duration * math.exp((self.pulse_amplitude - self.vth_nominal) / self.v0) * window_mid
        )

    @property
    def g_mid(self) -> float:
        return 0.5 * (self.g_min + self.g_max)

    @property
    def k_w(self) -> float:
        return self.w_max / (self.g_max - self.g_min)


class LearningRates(_Section):
    """Layer-specific rates of the separate evaluation/action networks."""

    beta: float = Field(default=0.2, gt=0)
    beta_h: float = Field(default=0.1, gt=0)
    rho: float = Field(default=0.25, gt=0)
    rho_h: float = Field(default=0.2, gt=0)


class SharedLearningRates(_Section):
    """Rates of the shared actor-critic network (value/policy, output/hidden)."""

    value_out: float = Field(default=0.25, gt=0)
    value_hidden: float = Field(default=0.2, gt=0)
    policy_out: float = Field(default=0.2, gt=0)
    policy_hidden: float = Field(default=0.1, gt=0)


class TrainingConfig(_Section):
    """Raw re-training parameters; unset values are filled by resolve_training."""

    approach: Approach = Approach.manhattan_pq
    gamma: Optional[float] = Field(default=None, ge=0, lt=1)
    rates: LearningRates = Field(default_factory=LearningRates)
    pq_threshold: Optional[float] = Field(default=None, ge=0, lt=1)
    stop_C: int = Field(default=50, ge=1)
    variable_dr: bool = False
    max_trials: Optional[int] = Field(default=None, ge=1, le=PRETRAIN_TRIAL_LIMIT)
    hardware_readout: Optional[bool] = None

    dr_window: int = Field(default=50, ge=1)
    dr_step: float = Field(default=0.02, gt=0)
    dr_success_threshold: float = Field(default=0.35, ge=0, le=1)
    gamma_min: float = Field(default=0.5, ge=0, lt=1)
    gamma_max: float = Field(default=0.99, gt=0, lt=1)
    init_scale: float = Field(default=0.3, gt=0)

    @field_validator("approach", mode="before")
    @classmethod
    def _v_approach(cls, v):
        if v is None or isinstance(v, Approach):
            return v
        return APPROACH_ALIASES.get(_canon(str(v)), v)

    @model_validator(mode="after")
    def _gamma_bounds(self):
        if self.gamma_min > self.gamma_max:
            raise ValueError("gamma_min must be <= gamma_max")
        return self

    @model_validator(mode="after")
    def _trial_limit(self):
        limit = APPROACH_DEFAULTS[self.approach]["max_trials"]
        if self.max_trials is not None and self.max_trials > limit:
            raise ValueError(f"{self.approach.value} runs at most {limit} trials, got {self.max_trials}")
        return self


class PretrainConfig(_Section):
    """Ex-situ pre-training of the separate networks on the standard pendulum."""

    stop_C: int = Field(default=50, ge=1)
    max_trials: int = Field(default=PRETRAIN_TRIAL_LIMIT, ge=1, le=PRETRAIN_TRIAL_LIMIT)
    gamma: float = Field(default=0.85, ge=0, lt=1)
    rates: LearningRates = Field(default_factory=LearningRates)
    init_scale: float = Field(default=0.3, gt=0)


class OffPolicyConfig(_Section):
    buffer_size: int = Field(default=150_000, ge=1)
    samples: int = Field(default=200_000, ge=1)
    behavior_prob: float = Field(default=0.5, gt=0, lt=1)
    gamma: float = Field(default=0.9, ge=0, lt=1)
    rates: SharedLearningRates = Field(default_factory=SharedLearningRates)
    init_scale: float = Field(default=0.3, gt=0)


class SynchronousConfig(_Section):
    learners: int = 4
    total_samples: int = Field(default=500_000, ge=1)
    checkpoint_every: int = Field(default=25_000, ge=1)
    gamma: float = Field(default=0.9, ge=0, lt=1)
    rates: SharedLearningRates = Field(default_factory=SharedLearningRates)

    @field_validator("learners")
    @classmethod
    def _v_learners(cls, v: int):
        if v not in (1, 2, 4, 8):
            raise ValueError("learners must be one of 1, 2, 4, 8")
        return v


class HarnessConfig(_Section):
    scale: Scale = Scale.desk
    seed: int = Field(default=42, ge=0)
    desk_variations: int = Field(default=5, ge=1, le=25)
    desk_seeds: int = Field(default=5, ge=1)
    full_seeds: int = Field(default=100, ge=1)
    workers: int = Field(default=1, ge=1)
    c_values: List[int] = Field(default_factory=lambda: [50, 100, 400])
    device_c_values: List[int] = Field(default_factory=lambda: [50, 100, 150])
    scaling_learners: List[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    curve_bin: int = Field(default=35, ge=1)

    @field_validator("c_values", "device_c_values")
    @classmethod
    def _v_sorted(cls, v: List[int]):
        if not v or any(c < 1 for c in v):
            raise ValueError("C values must be positive")
        return sorted(set(v))


class ExperimentConfig(_Section):
    """Whole configuration file."""

    version: str = "1"
    pendulum: PendulumConfig = Field(default_factory=PendulumConfig)
    pools: PoolConfig = Field(default_factory=PoolConfig)
    device: DeviceConfig = Field(default_factory=DeviceConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    pretrain: PretrainConfig = Field(default_factory=PretrainConfig)
    offpolicy: OffPolicyConfig = Field(default_factory=OffPolicyConfig)
    synchronous: SynchronousConfig = Field(default_factory=SynchronousConfig)
    harness: HarnessConfig = Field(default_factory=HarnessConfig)

    @field_validator("version")
    @classmethod
    def _v_version(cls, v: str):
        if str(v) != "1":
            raise ValueError(f"unsupported config version {v!r}")
        return str(v)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a TOML config file and validate it."""
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    return ExperimentConfig.model_validate(raw)


# =========================
# Resolved training (engine input)
# =========================

class ResolvedTraining(BaseModel):
    """Complete re-training specification. The engine can run any ResolvedTraining."""

    model_config = ConfigDict(frozen=True)

    approach: Approach
    update_rule: UpdateRule
    pretrained: bool
    uses_pq: bool
    hardware_readout: bool

    gamma: float = Field(ge=0, lt=1)
    pq_threshold: float = Field(ge=0, lt=1)
    rates: LearningRates
    stop_C: int = Field(ge=1)
    max_trials: int = Field(ge=1)
    variable_dr: bool

    dr_window: int
    dr_step: float
    dr_success_threshold: float
    gamma_min: float
    gamma_max: float
    init_scale: float


APPROACH_DEFAULTS: Dict[Approach, Dict[str, Any]] = {
    Approach.baseline: dict(
        update_rule=UpdateRule.exact, pretrained=False, uses_pq=False, hardware_readout=False,
        gamma=0.85, pq_threshold=0.9, max_trials=PRETRAIN_TRIAL_LIMIT,
    ),
    Approach.baseline_pq: dict(
        update_rule=UpdateRule.exact, pretrained=False, uses_pq=True, hardware_readout=False,
        gamma=0.85, pq_threshold=0.9, max_trials=PRETRAIN_TRIAL_LIMIT,
    ),
    Approach.exact: dict(
        update_rule=UpdateRule.exact, pretrained=True, uses_pq=False, hardware_readout=False,
        gamma=0.9, pq_threshold=0.9, max_trials=RETRAIN_TRIAL_LIMIT,
    ),
    Approach.exact_pq: dict(
        update_rule=UpdateRule.exact, pretrained=True, uses_pq=True, hardware_readout=False,
        gamma=0.9, pq_threshold=0.9, max_trials=RETRAIN_TRIAL_LIMIT,
    ),
    Approach.manhattan: dict(
        update_rule=UpdateRule.manhattan, pretrained=True, uses_pq=False, hardware_readout=True,
        gamma=0.75, pq_threshold=0.95, max_trials=RETRAIN_TRIAL_LIMIT,
    ),
    Approach.manhattan_pq: dict(
        update_rule=UpdateRule.manhattan, pretrained=True, uses_pq=True, hardware_readout=True,
        gamma=0.75, pq_threshold=0.95, max_trials=RETRAIN_TRIAL_LIMIT,
    ),
    Approach.variable_amplitude: dict(
        update_rule=UpdateRule.variable_amplitude, pretrained=True, uses_pq=False, hardware_readout=True,
        gamma=0.9, pq_threshold=0.9, max_trials=RETRAIN_TRIAL_LIMIT,
    ),
}

SCENARIO_APPROACHES: Dict[Scenario, Tuple[Approach, ...]] = {
    Scenario.complete_info: (
        Approach.baseline, Approach.baseline_pq,
        Approach.exact, Approach.exact_pq,
        Approach.manhattan, Approach.manhattan_pq,
    ),
    Scenario.limited_info: (
        Approach.baseline, Approach.exact, Approach.variable_amplitude,
    ),
}


def resolve_training(cfg: TrainingConfig) -> ResolvedTraining:
    """
    Deterministically fill unset values from the approach defaults table.
    """

    defaults = APPROACH_DEFAULTS[cfg.approach]

    # 1) User overrides > defaults
    gamma = cfg.gamma if cfg.gamma is not None else defaults["gamma"]
    pq_threshold = cfg.pq_threshold if cfg.pq_threshold is not None else defaults["pq_threshold"]
    # model_copy skips validation, so an override is capped to the approach pool here too
    max_trials = min(cfg.max_trials or defaults["max_trials"], defaults["max_trials"])
    hardware_readout = (
        cfg.hardware_readout if cfg.hardware_readout is not None else defaults["hardware_readout"]
    )

    # 2) Variable DR starts inside its own clamp range
    if cfg.variable_dr:
        gamma = min(max(gamma, cfg.gamma_min), cfg.gamma_max)

    return ResolvedTraining(
        approach=cfg.approach,
        update_rule=defaults["update_rule"],
        pretrained=defaults["pretrained"],
        uses_pq=defaults["uses_pq"],
        hardware_readout=hardware_readout,

        gamma=gamma,
        pq_threshold=pq_threshold,
        rates=cfg.rates,
        stop_C=cfg.stop_C,
        max_trials=max_trials,
        variable_dr=cfg.variable_dr,

        dr_window=cfg.dr_window,
        dr_step=cfg.dr_step,
        dr_success_threshold=cfg.dr_success_threshold,
        gamma_min=cfg.gamma_min,
        gamma_max=cfg.gamma_max,
        init_scale=cfg.init_scale,
    )


def pretrain_as_training(cfg: PretrainConfig) -> ResolvedTraining:
    """Pre-training runs the Baseline rule on the standard pendulum."""
    resolved = resolve_training(
        TrainingConfig(
            approach=Approach.baseline,
            gamma=cfg.gamma,
            rates=cfg.rates,
            stop_C=cfg.stop_C,
            max_trials=cfg.max_trials,
            init_scale=cfg.init_scale,
        )
    )
    return resolved
