from __future__ import annotations

from pathlib import Path

import pytest
from pydantic import ValidationError

from src.pipeline.resolve import config_digest, resolve_experiment
from src.schema import (
    Approach,
    DeviceConfig,
    ExperimentConfig,
    PretrainConfig,
    Scenario,
    SynchronousConfig,
    TrainingConfig,
    UpdateRule,
    VariationMode,
    load_config,
    parse_approach,
    parse_scenario,
    parse_variation,
    pretrain_as_training,
    resolve_training,
)

EXAMPLES = Path(__file__).resolve().parents[1] / "data" / "examples"


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Manhattan PQ", Approach.manhattan_pq),
        ("manhattan-pq", Approach.manhattan_pq),
        ("ManhattanPQ", Approach.manhattan_pq),
        ("VA", Approach.variable_amplitude),
        ("zero", Approach.baseline),
        ("pre", Approach.exact),
        ("exact_pq", Approach.exact_pq),
    ],
)
def test_approach_aliases(text, expected):
    assert parse_approach(text) == expected


def test_variation_and_scenario_aliases():
    assert parse_variation("30%") == VariationMode.pct30
    assert parse_variation("Full Range") == VariationMode.full_range
    assert parse_variation("ideal") == VariationMode.ideal
    assert parse_scenario("limited") == Scenario.limited_info
    assert parse_scenario("complete-info") == Scenario.complete_info


def test_unknown_alias_raises():
    with pytest.raises(ValueError):
        parse_approach("momentum")


def test_approach_defaults():
    m = resolve_training(TrainingConfig(approach="manhattan_pq"))
    assert (m.update_rule, m.gamma, m.pq_threshold, m.uses_pq, m.hardware_readout) == (
        UpdateRule.manhattan, 0.75, 0.95, True, True,
    )
    b = resolve_training(TrainingConfig(approach="baseline"))
    assert (b.pretrained, b.max_trials, b.gamma, b.uses_pq) == (False, 7000, 0.85, False)
    e = resolve_training(TrainingConfig(approach="exact_pq"))
    assert (e.gamma, e.pq_threshold, e.max_trials, e.hardware_readout) == (0.9, 0.9, 2000, False)
    va = resolve_training(TrainingConfig(approach="variable amplitude"))
    assert va.update_rule == UpdateRule.variable_amplitude and va.hardware_readout


def test_user_values_override_defaults():
    r = resolve_training(TrainingConfig(approach="manhattan_pq", gamma=0.8, max_trials=10, hardware_readout=False))
    assert (r.gamma, r.max_trials, r.hardware_readout) == (0.8, 10, False)


def test_trial_counts_stay_inside_the_phase_pools():
    with pytest.raises(ValidationError):
        TrainingConfig(approach="exact", max_trials=2001)
    with pytest.raises(ValidationError):
        TrainingConfig(approach="baseline", max_trials=7001)
    with pytest.raises(ValidationError):
        PretrainConfig(max_trials=7001)
    assert TrainingConfig(approach="baseline", max_trials=7000).max_trials == 7000

    # switching approach on a copy skips validation; resolution caps it instead
    wide = TrainingConfig(approach="baseline", max_trials=5000).model_copy(update={"approach": Approach.exact})
    assert resolve_training(wide).max_trials == 2000


def test_variable_discount_rate_starts_inside_its_range():
    r = resolve_training(TrainingConfig(approach="exact", gamma=0.3, variable_dr=True))
    assert r.gamma == 0.5


def test_pretraining_runs_the_baseline_rule():
    r = pretrain_as_training(ExperimentConfig().pretrain)
    assert (r.approach, r.gamma, r.max_trials, r.stop_C, r.uses_pq) == (Approach.baseline, 0.85, 7000, 50, False)


def test_device_calibration():
    cfg = DeviceConfig()
    assert cfg.k_w == 3.0
    assert cfg.g_mid == 0.5
    assert DeviceConfig(rate_a=5.0).rate == 5.0


@pytest.mark.parametrize(
    "build",
    [
        lambda: DeviceConfig(pulse_amplitude=4.6),
        lambda: DeviceConfig(g_min=1.0, g_max=0.5),
        lambda: SynchronousConfig(learners=3),
        lambda: TrainingConfig(gamma=1.0),
        lambda: TrainingConfig(unknown=1),
        lambda: ExperimentConfig(version="2"),
        lambda: ExperimentConfig.model_validate({"pools": {"initial_alpha_max_deg": 12.0}}),
        lambda: ExperimentConfig.model_validate({"pools": {"test_size": 5, "test_subsample": 6}}),
    ],
)
def test_invalid_configs_are_rejected(build):
    with pytest.raises(ValidationError):
        build()


def test_example_configs_load():
    desk = load_config(EXAMPLES / "desk.toml")
    assert desk.training.approach == Approach.manhattan_pq
    assert desk.pools.test_subsample == 100
    full = load_config(EXAMPLES / "full.toml")
    assert full.device.variation == VariationMode.full_range
    assert full.training.variable_dr


def test_config_digest_is_stable_and_sensitive():
    a = ExperimentConfig()
    assert config_digest(a) == config_digest(ExperimentConfig())
    assert len(config_digest(a)) == 64
    b = ExperimentConfig.model_validate({"harness": {"seed": 7}})
    assert config_digest(a) != config_digest(b)


def test_resolved_experiment_carries_training_defaults_and_rate():
    raw = resolve_experiment(ExperimentConfig())
    assert raw["training"]["update_rule"] == "manhattan"
    assert raw["device"]["rate_a"] == pytest.approx(DeviceConfig().rate)
