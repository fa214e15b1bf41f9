"""Experiment grids: one job per agent, gathered in agent order, aggregated into CSVs."""

from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
from tqdm import tqdm
from tqdm.contrib.concurrent import process_map

from src.harness.metrics import efficiency
from src.harness.population import AgentSpec, build_population
from src.harness.results import write_csv, write_manifest
from src.pipeline.two_fold import (
    pools_for,
    pretrain_complete,
    pretrain_limited,
    retrain_complete,
    retrain_limited,
    evaluation_states,
)
from src.schema import Approach, ExperimentConfig, VariationMode

logger = logging.getLogger(__name__)

COMPARED_APPROACHES: Tuple[Approach, ...] = (
    Approach.baseline,
    Approach.baseline_pq,
    Approach.exact,
    Approach.exact_pq,
    Approach.manhattan_pq,
)
DEVICE_MODES: Tuple[VariationMode, ...] = (VariationMode.ideal, VariationMode.pct30, VariationMode.full_range)

Row = Dict[str, Any]


def population_for(cfg: ExperimentConfig) -> List[AgentSpec]:
    h = cfg.harness
    return build_population(
        h.scale, h.seed, desk_variations=h.desk_variations, desk_seeds=h.desk_seeds, full_seeds=h.full_seeds
    )


def run_agents(
    fn: Callable[[Tuple[ExperimentConfig, AgentSpec]], List[Row]],
    cfg: ExperimentConfig,
    agents: Sequence[AgentSpec],
    *,
    workers: int = 1,
    progress: bool = False,
    desc: str = "agents",
) -> List[Row]:
    """Run fn per agent (in processes when workers > 1); rows come back in agent order."""
    jobs = [(cfg, agent) for agent in agents]
    if workers > 1:
        results = process_map(fn, jobs, max_workers=workers, chunksize=1, desc=desc, disable=not progress)
    else:
        results = [fn(job) for job in tqdm(jobs, desc=desc, disable=not progress)]
    return [row for rows in results for row in rows]


def _agent_fields(agent: AgentSpec) -> Row:
    return {"agent": agent.index, "mass_pct": agent.mass_pct, "length_pct": agent.length_pct}


def _mean(rows: Sequence[Row], key: str) -> float:
    return float(np.mean([r[key] for r in rows]))


def _group(rows: Sequence[Row], keys: Sequence[str]) -> Dict[tuple, List[Row]]:
    groups: Dict[tuple, List[Row]] = defaultdict(list)
    for r in rows:
        groups[tuple(r[k] for k in keys)].append(r)
    return groups


def _finish(out_dir: Path, cfg: ExperimentConfig, name: str, agents: Sequence[AgentSpec]) -> None:
    write_manifest(
        out_dir,
        cfg,
        {"master": cfg.harness.seed},
        {"experiment": name, "agents": len(agents)},
    )


# ----------------------------
# Complete-information grids
# ----------------------------

def _approaches_agent(job: Tuple[ExperimentConfig, AgentSpec]) -> List[Row]:
    cfg, agent = job
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    pre = pretrain_complete(cfg, agent, pools, tests)
    rows: List[Row] = [
        {**_agent_fields(agent), "approach": "pretrained_inference", "C": 0, "reached": True,
         "updates_per_weight": 0.0, "mean_t2f": pre.pretrained_t2f, "pretrained_t2f": pre.pretrained_t2f}
    ]
    for approach in COMPARED_APPROACHES:
        outcome = retrain_complete(
            cfg, agent, approach, pre.pretrained_weights, pre.pretrained_t2f, pools, tests,
            milestones=cfg.harness.c_values, variation=VariationMode.ideal,
        )
        for c in cfg.harness.c_values:
            m = outcome.metrics[c]
            rows.append(
                {**_agent_fields(agent), "approach": approach.value, "C": c,
                 "reached": outcome.run.milestones[c].reached,
                 "updates_per_weight": m.updates_per_weight, "mean_t2f": m.mean_t2f,
                 "pretrained_t2f": pre.pretrained_t2f}
            )
    return rows


def run_approaches(cfg: ExperimentConfig, out_dir: str | Path, *, workers: int = 1, progress: bool = False) -> Path:
    """Updates per weight and t2f for the complete-information approaches at each C."""
    out_dir = Path(out_dir)
    agents = population_for(cfg)
    rows = run_agents(_approaches_agent, cfg, agents, workers=workers, progress=progress, desc="approaches")
    write_csv(
        out_dir / "approaches_agents.csv",
        ("agent", "mass_pct", "length_pct", "approach", "C", "reached", "updates_per_weight", "mean_t2f", "pretrained_t2f"),
        rows,
    )
    summary = []
    for (approach, c), group in _group(rows, ("approach", "C")).items():
        summary.append(
            {"approach": approach, "C": c, "agents": len(group),
             "reached": float(np.mean([bool(r["reached"]) for r in group])),
             "updates_per_weight": _mean(group, "updates_per_weight"), "mean_t2f": _mean(group, "mean_t2f")}
        )
    path = write_csv(out_dir / "approaches.csv", ("approach", "C", "agents", "reached", "updates_per_weight", "mean_t2f"), summary)
    _finish(out_dir, cfg, "approaches", agents)
    return path


def _device_modes_agent(job: Tuple[ExperimentConfig, AgentSpec]) -> List[Row]:
    cfg, agent = job
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    pre = pretrain_complete(cfg, agent, pools, tests)
    rows: List[Row] = []
    for mode in DEVICE_MODES:
        for variable_dr in (False, True):
            outcome = retrain_complete(
                cfg, agent, Approach.manhattan_pq, pre.pretrained_weights, pre.pretrained_t2f, pools, tests,
                milestones=cfg.harness.device_c_values, variable_dr=variable_dr, variation=mode,
            )
            for c in cfg.harness.device_c_values:
                m = outcome.metrics[c]
                rows.append(
                    {**_agent_fields(agent), "variation": mode.value, "dr": "variable" if variable_dr else "fixed",
                     "C": c, "updates_per_weight": m.updates_per_weight, "mean_t2f": m.mean_t2f,
                     "pretrained_t2f": pre.pretrained_t2f, "efficiency": m.efficiency}
                )
    return rows


def run_device_modes(cfg: ExperimentConfig, out_dir: str | Path, *, workers: int = 1, progress: bool = False) -> Path:
    """ManhattanPQ weight-update efficiency, fixed vs variable discount rate, per device mode."""
    out_dir = Path(out_dir)
    agents = population_for(cfg)
    rows = run_agents(_device_modes_agent, cfg, agents, workers=workers, progress=progress, desc="device_modes")
    write_csv(
        out_dir / "device_modes_agents.csv",
        ("agent", "mass_pct", "length_pct", "variation", "dr", "C", "updates_per_weight", "mean_t2f",
         "pretrained_t2f", "efficiency"),
        rows,
    )
    summary = []
    for (mode, dr, c), group in _group(rows, ("variation", "dr", "C")).items():
        t2f = _mean(group, "mean_t2f")
        pre = _mean(group, "pretrained_t2f")
        updates = _mean(group, "updates_per_weight")
        summary.append(
            {"variation": mode, "dr": dr, "C": c, "agents": len(group), "updates_per_weight": updates,
             "mean_t2f": t2f, "pretrained_t2f": pre, "efficiency": efficiency(t2f, pre, updates)}
        )
    path = write_csv(
        out_dir / "device_modes.csv",
        ("variation", "dr", "C", "agents", "updates_per_weight", "mean_t2f", "pretrained_t2f", "efficiency"),
        summary,
    )
    _finish(out_dir, cfg, "device_modes", agents)
    return path


def bin_curve(values: Sequence[float], width: int) -> List[float]:
    """Means of consecutive bins of `width` values; a trailing partial bin is kept."""
    return [float(np.mean(values[i:i + width])) for i in range(0, len(values), width)]


def _pretraining_curves_agent(job: Tuple[ExperimentConfig, AgentSpec]) -> List[Row]:
    cfg, agent = job
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    pre = pretrain_complete(cfg, agent, pools, tests)
    rows: List[Row] = []
    # without pre-training the exact rule starts from random weights, i.e. the baseline approach
    for pretrained, approach in ((True, Approach.exact), (False, Approach.baseline)):
        outcome = retrain_complete(
            cfg, agent, approach, pre.pretrained_weights, pre.pretrained_t2f, pools, tests,
            variation=VariationMode.ideal,
        )
        curve = bin_curve([t.steps_survived for t in outcome.run.trials], cfg.harness.curve_bin)
        for b, t2f in enumerate(curve):
            rows.append({**_agent_fields(agent), "pretrained": pretrained, "bin": b,
                         "first_trial": b * cfg.harness.curve_bin + 1, "mean_t2f": t2f})
    return rows


def run_pretraining_curves(cfg: ExperimentConfig, out_dir: str | Path, *, workers: int = 1, progress: bool = False) -> Path:
    """Exact learning curves with and without pre-training, t2f averaged per bin of trials."""
    out_dir = Path(out_dir)
    agents = population_for(cfg)
    rows = run_agents(_pretraining_curves_agent, cfg, agents, workers=workers, progress=progress, desc="pretraining_curves")
    summary = []
    for (pretrained, b), group in sorted(_group(rows, ("pretrained", "bin")).items(), key=lambda kv: (not kv[0][0], kv[0][1])):
        summary.append({"pretrained": pretrained, "bin": b, "first_trial": group[0]["first_trial"],
                        "agents": len(group), "mean_t2f": _mean(group, "mean_t2f")})
    path = write_csv(out_dir / "pretraining_curves.csv", ("pretrained", "bin", "first_trial", "agents", "mean_t2f"), summary)
    _finish(out_dir, cfg, "pretraining_curves", agents)
    return path


# ----------------------------
# Limited-information grids
# ----------------------------

def _checkpoint_rows(agent: AgentSpec, run, **fields) -> List[Row]:
    return [
        {**_agent_fields(agent), **fields, "checkpoint": i, "samples": c.samples, "time_steps": c.time_steps,
         "updates_per_weight": c.updates_per_weight, "mean_t2f": c.mean_t2f}
        for i, c in enumerate(run.checkpoints)
    ]


def _learner_scaling_agent(job: Tuple[ExperimentConfig, AgentSpec]) -> List[Row]:
    cfg, agent = job
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    pretrained = pretrain_limited(cfg, agent)
    rows: List[Row] = []
    for init, approach in (("zero", Approach.baseline), ("pre", Approach.exact)):
        for k in cfg.harness.scaling_learners:
            run = retrain_limited(cfg, agent, approach, pretrained, k, pools, tests, variation=VariationMode.ideal)
            rows.extend(_checkpoint_rows(agent, run, init=init, K=k))
    return rows


def _curve_summary(rows: Sequence[Row], keys: Sequence[str]) -> List[Row]:
    summary = []
    for key, group in _group(rows, (*keys, "checkpoint")).items():
        first = group[0]
        summary.append(
            {**dict(zip(keys, key[:-1])), "checkpoint": key[-1], "agents": len(group),
             "samples": first["samples"], "time_steps": first["time_steps"],
             "updates_per_weight": _mean(group, "updates_per_weight"), "mean_t2f": _mean(group, "mean_t2f")}
        )
    return summary


def run_learner_scaling(cfg: ExperimentConfig, out_dir: str | Path, *, workers: int = 1, progress: bool = False) -> Path:
    """Zero- vs pre-initialized synchronous re-training for each learner count K."""
    out_dir = Path(out_dir)
    agents = population_for(cfg)
    rows = run_agents(_learner_scaling_agent, cfg, agents, workers=workers, progress=progress, desc="learner_scaling")
    columns = ("init", "K", "checkpoint", "agents", "samples", "time_steps", "updates_per_weight", "mean_t2f")
    path = write_csv(out_dir / "learner_scaling.csv", columns, _curve_summary(rows, ("init", "K")))
    _finish(out_dir, cfg, "learner_scaling", agents)
    return path


def _device_curves_agent(job: Tuple[ExperimentConfig, AgentSpec]) -> List[Row]:
    cfg, agent = job
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    pretrained = pretrain_limited(cfg, agent)
    k = cfg.synchronous.learners
    rows: List[Row] = []
    for mode in DEVICE_MODES:
        run = retrain_limited(cfg, agent, Approach.variable_amplitude, pretrained, k, pools, tests, variation=mode)
        rows.extend(_checkpoint_rows(agent, run, variation=mode.value, K=k))
    return rows


def run_device_curves(cfg: ExperimentConfig, out_dir: str | Path, *, workers: int = 1, progress: bool = False) -> Path:
    """Variable-amplitude re-training checkpoints under the three device variation cases."""
    out_dir = Path(out_dir)
    agents = population_for(cfg)
    rows = run_agents(_device_curves_agent, cfg, agents, workers=workers, progress=progress, desc="device_curves")
    columns = ("variation", "K", "checkpoint", "agents", "samples", "time_steps", "updates_per_weight", "mean_t2f")
    path = write_csv(out_dir / "device_curves.csv", columns, _curve_summary(rows, ("variation", "K")))
    _finish(out_dir, cfg, "device_curves", agents)
    return path


EXPERIMENTS: Dict[str, Callable[..., Path]] = {
    "approaches": run_approaches,
    "device_modes": run_device_modes,
    "pretraining_curves": run_pretraining_curves,
    "learner_scaling": run_learner_scaling,
    "device_curves": run_device_curves,
}
