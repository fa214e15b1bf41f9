"""Desk-scale runs; deselected by default (pytest -m slow)."""

from __future__ import annotations

import os
from typing import Dict, List

import pytest

from src.harness.experiments import run_approaches, run_device_modes, run_learner_scaling
from src.harness.population import single_agent
from src.harness.results import read_csv
from src.pipeline.two_fold import evaluation_states, inference_tests, pools_for, pretrain_complete
from src.schema import ExperimentConfig

pytestmark = pytest.mark.slow

WORKERS = max(1, os.cpu_count() or 1)
PRETRAINED_T2F = 4106.1


def _desk(**harness) -> ExperimentConfig:
    raw = ExperimentConfig().model_dump()
    raw["harness"].update({"workers": WORKERS, **harness})
    return ExperimentConfig.model_validate(raw)


def _rows(path, **match) -> List[Dict[str, str]]:
    return [r for r in read_csv(path) if all(r[k] == str(v) for k, v in match.items())]


def _one(path, **match) -> Dict[str, str]:
    rows = _rows(path, **match)
    assert len(rows) == 1, match
    return rows[0]


@pytest.fixture(scope="module")
def approaches(tmp_path_factory):
    cfg = _desk(c_values=[50])
    return run_approaches(cfg, tmp_path_factory.mktemp("approaches"), workers=WORKERS)


@pytest.fixture(scope="module")
def device_modes(tmp_path_factory):
    cfg = _desk(device_c_values=[50])
    return run_device_modes(cfg, tmp_path_factory.mktemp("device_modes"), workers=WORKERS)


@pytest.fixture(scope="module")
def learner_scaling(tmp_path_factory):
    cfg = _desk(desk_variations=4, desk_seeds=5, scaling_learners=[1, 4])
    return run_learner_scaling(cfg, tmp_path_factory.mktemp("learner_scaling"), workers=WORKERS)


# ----------------------------
# Complete information
# ----------------------------

def test_pretrained_inference_is_reproducible():
    cfg = ExperimentConfig()
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    agent = single_agent(cfg.harness.seed)
    pre = pretrain_complete(cfg, agent, pools, tests)
    assert inference_tests(cfg, agent, pre.pretrained_weights, tests) == pre.pretrained_tests
    assert len(pre.pretrained_tests) == 100


def test_pretrained_agents_balance_and_exact_retraining_improves(approaches):
    inference = float(_one(approaches, approach="pretrained_inference", C=0)["mean_t2f"])
    exact = float(_one(approaches, approach="exact", C=50)["mean_t2f"])
    assert inference == pytest.approx(PRETRAINED_T2F, rel=0.15)
    assert exact > inference


def test_manhattan_pq_needs_two_orders_fewer_updates_than_baseline(approaches):
    baseline = _one(approaches, approach="baseline", C=50)
    manhattan = _one(approaches, approach="manhattan_pq", C=50)
    assert float(baseline["updates_per_weight"]) >= 100 * float(manhattan["updates_per_weight"])
    assert float(manhattan["mean_t2f"]) >= 0.9 * float(baseline["mean_t2f"])


def test_variable_discount_rate_is_more_efficient(device_modes):
    fixed = _one(device_modes, variation="ideal", dr="fixed", C=50)
    variable = _one(device_modes, variation="ideal", dr="variable", C=50)
    assert float(variable["efficiency"]) > float(fixed["efficiency"])


def test_full_range_variation_stays_close_to_ideal_devices(device_modes):
    ideal = float(_one(device_modes, variation="ideal", dr="fixed", C=50)["mean_t2f"])
    full = float(_one(device_modes, variation="full_range", dr="fixed", C=50)["mean_t2f"])
    assert full == pytest.approx(ideal, rel=0.2)


# ----------------------------
# Limited information
# ----------------------------

def _updates_to_reach(rows: List[Dict[str, str]], target: float) -> float | None:
    for r in sorted(rows, key=lambda r: int(r["checkpoint"])):
        if float(r["mean_t2f"]) >= target:
            return float(r["updates_per_weight"])
    return None


def test_pretrained_learners_reach_the_target_with_fewer_updates(learner_scaling):
    target = 4000.0
    pre = _rows(learner_scaling, init="pre", K=4)
    zero = _rows(learner_scaling, init="zero", K=1)
    assert int(pre[0]["agents"]) == 20

    pre_updates = _updates_to_reach(pre, target)
    assert pre_updates is not None
    zero_updates = _updates_to_reach(zero, target)
    if zero_updates is None:
        # never reached: the whole run is a lower bound on what it would need
        zero_updates = max(float(r["updates_per_weight"]) for r in zero)
    assert zero_updates >= 10 * pre_updates
