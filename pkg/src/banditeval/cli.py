"""Command-line entry point.

Subcommands:
  run            run a configured experiment and write result CSVs
  check-bounds   Monte Carlo coverage check of the optimism guarantees
  make-ref       compute and cache reference statistics from an embedding file
  gen-synthetic  write a synthetic Gaussian embedding file
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import dataio, runner
from .config import ExperimentConfig, load_config
from .errors import BanditEvalError

# CLI flags overriding ExperimentConfig fields, all optional.
_OVERRIDES = (
    ("--steps", int, "number of policy steps T"),
    ("--batch-size", int, "samples drawn per pull"),
    ("--delta", float, "total failure budget in (0, 1)"),
    ("--trials", int, "independent trials to average over"),
    ("--seed", int, "base seed; trial i uses seed+i"),
    ("--kappa", float, "covariance concentration constant"),
    ("--bonus-mode", str, "plugin or bounded_norm"),
    ("--norm-bound", float, "embedding norm bound C for bounded_norm mode"),
    ("--threshold-mult", float, "covariance thresholding multiplier, 0 disables"),
    ("--burn-in", int, "forced samples per arm before the loop"),
    ("--workers", int, "parallel trial workers"),
    ("--output-dir", str, "directory for result files"),
)


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    for flag, typ, help_text in _OVERRIDES:
        parser.add_argument(flag, type=typ, default=None, help=help_text)


def _load_with_overrides(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    raw = config.to_dict()
    for flag, _, _ in _OVERRIDES:
        name = flag.lstrip("-").replace("-", "_")
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    return ExperimentConfig.from_dict(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditeval",
        description="Online generative-model selection with optimism policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config", help="YAML experiment config")
    _add_override_flags(p_run)

    p_chk = sub.add_parser("check-bounds", help="Monte Carlo optimism coverage check")
    p_chk.add_argument("config", help="YAML experiment config (synthetic arms only)")
    p_chk.add_argument("--mc-trials", type=int, default=200, help="Monte Carlo repetitions")
    _add_override_flags(p_chk)

    p_ref = sub.add_parser("make-ref", help="cache reference statistics from embeddings")
    p_ref.add_argument("embeddings", help="EMB1 or CSV embedding file")
    p_ref.add_argument("output", help="output .npz statistics file")

    p_gen = sub.add_parser("gen-synthetic", help="write a synthetic Gaussian embedding file")
    p_gen.add_argument("output", help="output EMB1 file")
    p_gen.add_argument("--dim", type=int, required=True)
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--mean-shift", type=float, default=0.0, help="constant added to all coords")
    p_gen.add_argument("--scale", type=float, default=1.0, help="isotropic standard deviation")
    p_gen.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_with_overrides(args)
    paths = runner.run(config, out_dir=args.output_dir)
    print(f"aggregate: {paths['aggregate']}")
    for kind, path in paths["trials"].items():
        print(f"{kind}: {path}")
    print(f"manifest: {paths['manifest']}")
    return 0


def _cmd_check_bounds(args: argparse.Namespace) -> int:
    config = _load_with_overrides(args)
    report = runner.check_bounds(config, trials=args.mc_trials)
    bad = 0
    for entry in report:
        print(
            f"arm={entry['arm']} metric={entry['metric']} n={entry['n']} "
            f"coverage={entry['coverage']:.3f} target={entry['target']:.3f} "
            f"status={entry['status']}"
        )
        bad += entry["status"] == "violation"
    return 1 if bad else 0


def _cmd_make_ref(args: argparse.Namespace) -> int:
    data = dataio.load_embeddings(args.embeddings)
    ref = dataio.compute_ref_stats(data)
    dataio.save_ref_stats(args.output, ref)
    print(f"wrote reference statistics for {data.shape[0]}x{data.shape[1]} data to {args.output}")
    return 0


def _cmd_gen_synthetic(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    data = args.mean_shift + args.scale * rng.standard_normal((args.count, args.dim))
    dataio.write_embeddings(args.output, data)
    print(f"wrote {args.count}x{args.dim} embeddings to {args.output}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "check-bounds": _cmd_check_bounds,
    "make-ref": _cmd_make_ref,
    "gen-synthetic": _cmd_gen_synthetic,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BanditEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
