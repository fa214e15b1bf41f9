"""
Command line entry point.

    python -m src.harness.cli pretrain --scenario complete_info --out out/pre
    python -m src.harness.cli retrain  --scenario complete_info --approach manhattan_pq --checkpoint out/pre/pretrain_weights.txt
    python -m src.harness.cli test     --checkpoint out/pre/pretrain_weights.txt
    python -m src.harness.cli sweep    --experiment approaches --config data/examples/desk.toml --workers 4
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src.errors import CheckpointFormatError, ConfigurationError, SimulationError
from src.harness.experiments import EXPERIMENTS
from src.harness.metrics import compute_metrics
from src.harness.population import single_agent
from src.harness.results import write_checkpoints_csv, write_manifest, write_trials_csv
from src.harness.surfaces import SurfaceGrid, sample_surfaces, write_surfaces
from src.network.checkpoint import load_checkpoint, save_checkpoint
from src.network.weights import SeparateNetWeights, SharedNetWeights
from src.pipeline.two_fold import (
    check_compatibility,
    device_for,
    evaluate_limited,
    evaluate_separate,
    evaluation_states,
    inference_tests,
    pools_for,
    pretrain_complete,
    pretrain_limited,
    retrain_complete,
    retrain_limited,
    varied_env,
)
from src.schema import (
    ExperimentConfig,
    Scenario,
    load_config,
    parse_approach,
    parse_scenario,
    parse_variation,
    resolve_training,
)

logger = logging.getLogger("src.harness")


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults) with the command-line overrides applied and re-validated."""
    base = load_config(args.config) if args.config else ExperimentConfig()
    raw: Dict[str, Any] = base.model_dump()
    if args.seed is not None:
        raw["harness"]["seed"] = args.seed
    if args.workers is not None:
        raw["harness"]["workers"] = args.workers
    if getattr(args, "approach", None):
        raw["training"]["approach"] = parse_approach(args.approach)
    if getattr(args, "variation", None):
        raw["device"]["variation"] = parse_variation(args.variation)
    if getattr(args, "variable_dr", False):
        raw["training"]["variable_dr"] = True
    if getattr(args, "agents", None):
        raw["synchronous"]["learners"] = args.agents
    return ExperimentConfig.model_validate(raw)


def _print(key: str, value: Any) -> None:
    print(f"{key}:{value}")


def _progress(args: argparse.Namespace) -> bool:
    return not args.quiet and sys.stderr.isatty()


# ----------------------------
# Verbs
# ----------------------------

def cmd_pretrain(args: argparse.Namespace, cfg: ExperimentConfig) -> None:
    out = Path(args.out)
    scenario = parse_scenario(args.scenario)
    agent = single_agent(cfg.harness.seed, args.mass_pct, args.length_pct)
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)

    if scenario == Scenario.complete_info:
        pre = pretrain_complete(cfg, agent, pools, tests)
        weights = pre.pretrained_weights
        write_trials_csv(out / "pretrain_trials.csv", pre.pretrain_run.trials)
        write_trials_csv(out / "pretrain_test_trials.csv", pre.pretrained_tests)
        _print("PRETRAIN_TRIALS", len(pre.pretrain_run.trials))
        _print("MEAN_T2F", pre.pretrained_t2f)
    else:
        weights = pretrain_limited(cfg, agent, progress=_progress(args))
        t2f = evaluate_limited(cfg, agent, weights, tests)
        _print("MEAN_T2F", sum(t2f) / len(t2f))

    path = save_checkpoint(out / "pretrain_weights.txt", weights)
    write_surfaces(out / "pretrain_surfaces.csv", sample_surfaces(weights, SurfaceGrid.regular(cfg.pendulum), cfg.pendulum))
    write_manifest(out, cfg, {"master": cfg.harness.seed, "weights": agent.weight_seed}, {"verb": "pretrain"})
    _print("CHECKPOINT", path)


def cmd_retrain(args: argparse.Namespace, cfg: ExperimentConfig) -> None:
    out = Path(args.out)
    scenario = parse_scenario(args.scenario)
    approach = cfg.training.approach
    check_compatibility(scenario, approach)
    agent = single_agent(cfg.harness.seed, args.mass_pct, args.length_pct)
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    training = resolve_training(cfg.training)

    if scenario == Scenario.complete_info:
        if args.checkpoint:
            pretrained = load_checkpoint(args.checkpoint)
            if not isinstance(pretrained, SeparateNetWeights):
                raise CheckpointFormatError("complete_info re-training needs a separate-network checkpoint")
            pretrained_t2f = compute_metrics(inference_tests(cfg, agent, pretrained, tests), 0.0, 0).mean_t2f
        else:
            pre = pretrain_complete(cfg, agent, pools, tests)
            pretrained, pretrained_t2f = pre.pretrained_weights, pre.pretrained_t2f
        outcome = retrain_complete(
            cfg, agent, approach, pretrained, pretrained_t2f, pools, tests,
            dump_dir=out,
        )
        c = cfg.training.stop_C
        metrics = outcome.metrics[c]
        write_trials_csv(out / "retrain_trials.csv", outcome.run.trials)
        write_trials_csv(out / "test_trials.csv", outcome.tests[c])
        path = save_checkpoint(out / "retrain_weights.txt", outcome.run.milestones[c].weights)
        _print("TRIALS", len(outcome.run.trials))
        _print("PRETRAINED_T2F", pretrained_t2f)
    else:
        pretrained = None
        if training.pretrained:
            pretrained = load_checkpoint(args.checkpoint) if args.checkpoint else pretrain_limited(cfg, agent)
            if not isinstance(pretrained, SharedNetWeights):
                raise CheckpointFormatError("limited_info re-training needs a shared-network checkpoint")
        run = retrain_limited(
            cfg, agent, approach, pretrained, cfg.synchronous.learners, pools, tests, progress=_progress(args)
        )
        write_checkpoints_csv(out / "checkpoints.csv", run.checkpoints)
        path = save_checkpoint(out / "retrain_weights.txt", run.weights)
        last = run.checkpoints[-1]
        metrics = None
        _print("SAMPLES", run.samples)
        _print("MEAN_T2F", last.mean_t2f)
        _print("UPDATES_PER_WEIGHT", run.updates_per_weight)

    if metrics is not None:
        _print("MEAN_T2F", metrics.mean_t2f)
        _print("UPDATES_PER_WEIGHT", metrics.updates_per_weight)
        _print("EFFICIENCY", metrics.efficiency_text())
    write_manifest(
        out, cfg, {"master": cfg.harness.seed, "device": agent.device_seed},
        {"verb": "retrain", "scenario": scenario, "approach": approach},
    )
    _print("CHECKPOINT", path)


def cmd_test(args: argparse.Namespace, cfg: ExperimentConfig) -> None:
    if not args.checkpoint:
        raise ConfigurationError("test needs --checkpoint")
    out = Path(args.out)
    weights = load_checkpoint(args.checkpoint)
    agent = single_agent(cfg.harness.seed, args.mass_pct, args.length_pct)
    pools = pools_for(cfg)
    tests = evaluation_states(cfg, pools)
    training = resolve_training(cfg.training)

    if isinstance(weights, SeparateNetWeights):
        trials = evaluate_separate(
            weights, varied_env(cfg, agent), tests, training, device_for(cfg, agent, None), (cfg.harness.seed, agent.index)
        )
        write_trials_csv(out / "test_trials.csv", trials)
        mean_t2f = compute_metrics(trials, 0.0, 0).mean_t2f
    else:
        t2f = evaluate_limited(cfg, agent, weights, tests, training.hardware_readout)
        mean_t2f = sum(t2f) / len(t2f)
    _print("TEST_STATES", len(tests))
    _print("MEAN_T2F", mean_t2f)


def cmd_sweep(args: argparse.Namespace, cfg: ExperimentConfig) -> None:
    runner = EXPERIMENTS[args.experiment]
    out = Path(args.out) / args.experiment
    path = runner(cfg, out, workers=cfg.harness.workers, progress=_progress(args))
    _print("RESULTS_DIR", out)
    _print("CSV", path)


COMMANDS = {
    "pretrain": cmd_pretrain,
    "retrain": cmd_retrain,
    "test": cmd_test,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.harness.cli", description="Memristive actor-critic simulator")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides [harness].seed)")
        p.add_argument("--out", type=str, default="out")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--quiet", action="store_true", help="no progress bars")

    def agent_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", default="complete_info")
        p.add_argument("--approach", default=None)
        p.add_argument("--variation", default=None)
        p.add_argument("--agents", type=int, default=None, help="number of synchronous actor-learners")
        p.add_argument("--checkpoint", default=None)
        p.add_argument("--variable-dr", dest="variable_dr", action="store_true")
        p.add_argument("--mass-pct", dest="mass_pct", type=int, default=0)
        p.add_argument("--length-pct", dest="length_pct", type=int, default=0)

    for name in ("pretrain", "retrain", "test"):
        p = sub.add_parser(name)
        common(p)
        agent_flags(p)

    p = sub.add_parser("sweep")
    common(p)
    p.add_argument("--experiment", required=True, choices=sorted(EXPERIMENTS))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")

    try:
        try:
            cfg = _build_config(args)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e
        except (ValueError, OSError) as e:
            raise ConfigurationError(str(e)) from e
        COMMANDS[args.command](args, cfg)
    except SimulationError as e:
        logger.debug("run failed", exc_info=True)
        print(f"ERROR:{e.category}:{e}", file=sys.stderr)
        return e.exit_code
    except (OSError, KeyError) as e:
        print(f"ERROR:internal:{e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
