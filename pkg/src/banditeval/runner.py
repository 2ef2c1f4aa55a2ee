"""Experiment orchestration: arm construction, trials, result files, bound checks."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import yaml

from . import dataio, matstats
from .arms import CategoricalArm, GaussianArm, ReplayArm
from .bandit import FD_UCB, Policy, TrialLog, aggregate, run_trial
from .bonus import (
    BOUNDED_NORM,
    ArmMomentSummary,
    BonusParams,
    fd_bonus,
    fd_bonus_bounded,
    optimistic_is,
)
from .bandit import IsArmState
from .config import ExperimentConfig, parse_cov_spec
from .errors import ConfigError
from .scores import RefStats, frechet_distance

OUTPUT_DIR_ENV = "BANDITEVAL_OUTDIR"
COVERAGE_SLACK = 0.05


def _arm_seed(trial_seed: int, arm_index: int) -> int:
    return int(np.random.SeedSequence([trial_seed, arm_index]).generate_state(1)[0])


def build_arms(config: ExperimentConfig, trial_seed: int) -> list:
    arms = []
    for i, spec in enumerate(config.arms):
        seed = _arm_seed(trial_seed, i)
        kind = spec["type"]
        if kind == "gaussian":
            arm = GaussianArm(
                np.asarray(spec["mean"], dtype=float), parse_cov_spec(spec["cov"]), seed
            )
            if "truncation" in spec:
                arm = arm.truncate_variance(float(spec["truncation"]))
        elif kind == "categorical":
            arm = CategoricalArm(
                np.asarray(spec["prototypes"], dtype=float),
                np.asarray(spec["weights"], dtype=float),
                seed,
            )
        else:
            arm = ReplayArm(
                dataio.load_embeddings(spec["path"]),
                seed,
                with_replacement=spec.get("with_replacement", True),
            )
        arms.append(arm)
    return arms


def resolve_reference(config: ExperimentConfig) -> RefStats | None:
    if config.metric != "fd":
        return None
    ref = config.reference
    if "stats_path" in ref:
        return dataio.load_ref_stats(ref["stats_path"])
    if "path" in ref:
        return dataio.compute_ref_stats(dataio.load_embeddings(ref["path"]))
    if "mean" in ref and "cov" in ref:
        return RefStats.from_mean_cov(
            np.asarray(ref["mean"], dtype=float), parse_cov_spec(ref["cov"])
        )
    raise ConfigError("reference needs 'stats_path', 'path', or 'mean'+'cov'")


def true_arm_scores(config: ExperimentConfig, arms: list, ref: RefStats | None) -> np.ndarray:
    """Ground-truth scores for regret: closed form for synthetic arms,
    full-dataset empirical score for replay arms."""
    values = []
    for arm in arms:
        if isinstance(arm, GaussianArm):
            values.append(arm.true_fd(ref))
        elif isinstance(arm, CategoricalArm):
            values.append(arm.true_is())
        else:
            values.append(arm.full_empirical_fd(ref))
    return np.array(values)


def make_policy(config: ExperimentConfig, kind: str) -> Policy:
    params = BonusParams(
        delta=config.delta / config.steps,
        kappa=config.kappa,
        mode=config.bonus_mode,
        norm_bound=config.norm_bound,
    )
    burn_in = config.burn_in if kind == FD_UCB else 0
    return Policy(kind=kind, params=params, burn_in=burn_in, threshold_mult=config.threshold_mult)


def _run_one(config_dict: dict, kind: str, trial_seed: int) -> TrialLog:
    config = ExperimentConfig.from_dict(config_dict)
    arms = build_arms(config, trial_seed)
    ref = resolve_reference(config)
    true_scores = true_arm_scores(config, arms, ref)
    policy = make_policy(config, kind)
    return run_trial(
        arms,
        policy,
        config.steps,
        config.batch_size,
        true_scores,
        ref=ref,
        rng_seed=trial_seed,
    )


def run_policy_trials(config: ExperimentConfig, kind: str, trial_seeds: list[int]) -> list[TrialLog]:
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_run_one, config.to_dict(), kind, seed) for seed in trial_seeds
            ]
            return [f.result() for f in futures]
    return [_run_one(config.to_dict(), kind, seed) for seed in trial_seeds]


def _fmt(x) -> str:
    return repr(float(x))


def _plain(obj):
    """Recursively convert numpy scalars/arrays so yaml.safe_dump accepts them."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_trial_csv(path: str, logs: list[TrialLog], n_arms: int) -> None:
    header = ["trial", "step", "chosen_arm", "inst_regret", "cum_regret", "avg_regret", "opr"]
    header += [f"pulls_{g}" for g in range(n_arms)]
    lines = [",".join(header)]
    for trial, log in enumerate(logs):
        for i, dec in enumerate(log.decisions):
            row = [
                str(trial),
                str(dec.step),
                str(dec.arm_id),
                _fmt(log.inst_regret[i]),
                _fmt(log.cum_regret[i]),
                _fmt(log.avg_regret[i]),
                _fmt(log.opr[i]),
            ]
            row += [str(int(c)) for c in dec.counts]
            lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_aggregate_csv(path: str, per_policy: dict) -> None:
    header = "policy,step,avg_regret_mean,avg_regret_stderr,opr_mean,opr_stderr"
    lines = [header]
    for kind, agg in per_policy.items():
        for i in range(len(agg["step"])):
            lines.append(
                ",".join(
                    [
                        kind,
                        str(int(agg["step"][i])),
                        _fmt(agg["avg_regret_mean"][i]),
                        _fmt(agg["avg_regret_stderr"][i]),
                        _fmt(agg["opr_mean"][i]),
                        _fmt(agg["opr_stderr"][i]),
                    ]
                )
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run(config: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Run all configured policies; write per-trial CSVs, the aggregate CSV,
    and a manifest echoing the resolved configuration and seeds."""
    out_dir = out_dir or config.output_dir or os.environ.get(OUTPUT_DIR_ENV, ".")
    os.makedirs(out_dir, exist_ok=True)
    trial_seeds = [config.seed + i for i in range(config.trials)]
    n_arms = len(config.arms)

    paths = {"trials": {}, "aggregate": None, "manifest": None}
    per_policy_agg = {}
    for kind in config.policies:
        logs = run_policy_trials(config, kind, trial_seeds)
        trial_path = os.path.join(out_dir, f"{kind}_trials.csv")
        write_trial_csv(trial_path, logs, n_arms)
        paths["trials"][kind] = trial_path
        per_policy_agg[kind] = aggregate(logs)

    agg_path = os.path.join(out_dir, "aggregate.csv")
    write_aggregate_csv(agg_path, per_policy_agg)
    paths["aggregate"] = agg_path

    manifest = {
        "config": _plain(config.to_dict()),
        "trial_seeds": trial_seeds,
        "outputs": {
            "aggregate": os.path.basename(agg_path),
            "trials": {k: os.path.basename(v) for k, v in paths["trials"].items()},
        },
    }
    manifest_path = os.path.join(out_dir, "manifest.yaml")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        yaml.safe_dump(manifest, fh, sort_keys=True)
    paths["manifest"] = manifest_path
    return paths


def _fd_coverage(
    arm: GaussianArm, ref: RefStats, n: int, trials: int, params: BonusParams, seed: int
) -> float:
    true_score = arm.true_fd(ref)
    true_summary_base = ArmMomentSummary.from_cov(n, arm.cov, 0.0)
    hits = 0
    for t in range(trials):
        sample_arm = GaussianArm(arm.mean, arm.cov, _arm_seed(seed, t))
        batch = sample_arm.pull(n)
        moments = matstats.StreamingMoments(arm.dim).update(batch)
        emp = frechet_distance(moments.mean, moments.covariance(), ref)
        summary = ArmMomentSummary(
            n=n,
            trace_cov=true_summary_base.trace_cov,
            trace_cov_sq_sqrt=true_summary_base.trace_cov_sq_sqrt,
            spec_norm=true_summary_base.spec_norm,
            eff_rank=true_summary_base.eff_rank,
            mean_dist_ref=float(np.linalg.norm(moments.mean - ref.mean)),
        )
        if params.mode == BOUNDED_NORM:
            b = fd_bonus_bounded(summary, arm.dim, ref.trace_sqrt_ref, params)
        else:
            b = fd_bonus(summary, ref.trace_sqrt_ref, params)
        if emp - b <= true_score + 1e-12:
            hits += 1
    return hits / trials


def _is_coverage(arm: CategoricalArm, n: int, trials: int, delta: float, seed: int) -> float:
    true_score = arm.true_is()
    hits = 0
    for t in range(trials):
        sample_arm = CategoricalArm(arm.prototypes, arm.weights, _arm_seed(seed, t))
        state = IsArmState(0, arm.d)
        state.update(sample_arm.pull(n))
        if optimistic_is(state.summary(), delta) >= true_score - 1e-12:
            hits += 1
    return hits / trials


def check_bounds(config: ExperimentConfig, trials: int = 200) -> list[dict]:
    """Monte Carlo optimism coverage per (arm, n); synthetic arms only.

    Uses the undivided delta: this validates the one-shot guarantees, not the
    union-bounded bandit configuration.
    """
    arms = build_arms(config, config.seed)
    if any(isinstance(a, ReplayArm) for a in arms):
        raise ConfigError("check_bounds requires synthetic arms with known ground truth")
    ref = resolve_reference(config)
    params = BonusParams(
        delta=config.delta,
        kappa=config.kappa,
        mode=config.bonus_mode,
        norm_bound=config.norm_bound,
    )
    target = 1.0 - config.delta - COVERAGE_SLACK
    report = []
    for i, arm in enumerate(arms):
        if isinstance(arm, GaussianArm):
            spec = matstats.spectral_norm(arm.cov)
            if spec > 0:
                r = matstats.effective_rank(arm.cov)
                n0 = math.ceil(4 * r + math.log(3.0 / config.delta))
            else:
                n0 = 2
            grid = sorted({max(2, n0 // 2), n0, 2 * n0})
            for n in grid:
                cov = _fd_coverage(arm, ref, n, trials, params, config.seed + 7919 * i)
                if n < n0:
                    status = "untested"  # below the guarantee's burn-in threshold
                elif cov >= target:
                    status = "ok"
                else:
                    status = "violation"
                report.append(
                    {
                        "arm": i,
                        "metric": "fd",
                        "n": n,
                        "trials": trials,
                        "coverage": cov,
                        "target": target,
                        "status": status,
                    }
                )
        else:
            for n in (50, 200):
                cov = _is_coverage(arm, n, trials, config.delta, config.seed + 7919 * i)
                status = "ok" if cov >= target else "violation"
                report.append(
                    {
                        "arm": i,
                        "metric": "is",
                        "n": n,
                        "trials": trials,
                        "coverage": cov,
                        "target": target,
                        "status": status,
                    }
                )
    return report
