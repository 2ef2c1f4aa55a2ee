"""Command-line figure rendering from experiment result CSVs."""

from __future__ import annotations

import argparse
import sys

from .plots import PlotSpec, SchemaError, plot_curves, plot_pull_distribution


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditplots", description="Render figures from bandit result CSVs."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_curves = sub.add_parser("curves", help="metric-vs-steps curves with stderr bands")
    p_curves.add_argument("inputs", nargs="+", help="aggregate CSVs, optionally LABEL=PATH")
    p_curves.add_argument("--output", default="curves.png")
    p_curves.add_argument("--metric", choices=("avg_regret", "opr"), default="avg_regret")
    p_curves.add_argument("--ylim", type=float, nargs=2, default=None)

    p_pulls = sub.add_parser("pulls", help="per-arm pull-count bars at one step")
    p_pulls.add_argument("trial_csv", help="per-trial CSV of one policy")
    p_pulls.add_argument("--step", type=int, required=True)
    p_pulls.add_argument("--output", default="pulls.png")
    return parser


def parse_inputs(raw: list[str]) -> list[tuple[str, str]]:
    pairs = []
    for i, item in enumerate(raw):
        if "=" in item:
            label, path = item.split("=", 1)
        else:
            label, path = f"run{i}" if len(raw) > 1 else "", item
        pairs.append((path, label))
    return pairs


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "curves":
            spec = PlotSpec(
                inputs=parse_inputs(args.inputs),
                output=args.output,
                metric=args.metric,
                ylim=tuple(args.ylim) if args.ylim else None,
            )
            plot_curves(spec)
        else:
            plot_pull_distribution(args.trial_csv, args.step, args.output)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
