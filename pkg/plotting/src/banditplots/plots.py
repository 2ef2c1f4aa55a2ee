"""Render average-regret / OPR curves and pull-count bars from result CSVs.

Input contract: the aggregate CSV has columns policy, step, avg_regret_mean,
avg_regret_stderr, opr_mean, opr_stderr; per-trial CSVs have trial, step,
chosen_arm, inst_regret, cum_regret, avg_regret, opr and one pulls_<g> column
per arm. Data arrays are passed to matplotlib untouched, so tests can verify
the plotted values against the files exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

METRICS = ("avg_regret", "opr")
AGGREGATE_COLUMNS = (
    "policy",
    "step",
    "avg_regret_mean",
    "avg_regret_stderr",
    "opr_mean",
    "opr_stderr",
)
TRIAL_COLUMNS = ("trial", "step", "chosen_arm", "inst_regret", "cum_regret", "avg_regret", "opr")

AXIS_LABELS = {"avg_regret": "average regret", "opr": "optimal pick ratio"}


class SchemaError(ValueError):
    """A CSV does not match the expected result schema."""


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: labeled aggregate CSVs, the metric, and the output path."""

    inputs: list = field(default_factory=list)  # (path, label) pairs
    output: str = "curves.png"
    metric: str = "avg_regret"
    ylim: tuple | None = None

    def __post_init__(self):
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")
        labels = [label for _, label in self.inputs]
        if len(set(labels)) != len(labels):
            raise SchemaError(f"input labels must be unique, got {labels}")
        if self.metric not in METRICS:
            raise SchemaError(f"metric must be one of {METRICS}, got {self.metric!r}")


def _read_rows(path: str, required: tuple) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_aggregate(path: str) -> dict:
    """Aggregate CSV -> {policy: column arrays}, rows kept in file order."""
    rows = _read_rows(path, AGGREGATE_COLUMNS)
    out: dict = {}
    for row in rows:
        series = out.setdefault(row["policy"], {c: [] for c in AGGREGATE_COLUMNS[1:]})
        series["step"].append(int(row["step"]))
        for c in AGGREGATE_COLUMNS[2:]:
            series[c].append(float(row[c]))
    return {
        policy: {c: np.asarray(v) for c, v in series.items()}
        for policy, series in out.items()
    }


def plot_curves(spec: PlotSpec):
    """One curve per policy with a shaded +/- stderr band; returns the figure."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path, label in spec.inputs:
        for policy, series in read_aggregate(path).items():
            name = f"{label}:{policy}" if len(spec.inputs) > 1 else policy
            mean = series[f"{spec.metric}_mean"]
            err = series[f"{spec.metric}_stderr"]
            ax.plot(series["step"], mean, label=name)
            ax.fill_between(series["step"], mean - err, mean + err, alpha=0.2)
    ax.set_xlabel("online steps")
    ax.set_ylabel(AXIS_LABELS[spec.metric])
    if spec.ylim is not None:
        ax.set_ylim(*spec.ylim)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output)
    return fig


def pull_counts_at_step(trial_csv: str, step: int) -> np.ndarray:
    """Per-arm pull counts at the step, averaged over trials."""
    rows = _read_rows(trial_csv, TRIAL_COLUMNS)
    pull_cols = sorted(
        (c for c in rows[0] if c.startswith("pulls_")), key=lambda c: int(c.split("_")[1])
    )
    if not pull_cols:
        raise SchemaError(f"{trial_csv}: missing pulls_<arm> columns")
    at_step = [r for r in rows if int(r["step"]) == step]
    if not at_step:
        steps = [int(r["step"]) for r in rows]
        raise SchemaError(
            f"{trial_csv}: step {step} outside recorded range "
            f"[{min(steps)}, {max(steps)}]"
        )
    counts = np.array([[float(r[c]) for c in pull_cols] for r in at_step])
    return counts.mean(axis=0)


def plot_pull_distribution(trial_csv: str, step: int, output: str):
    """Bar chart of mean per-arm pull counts at one step; returns the figure."""
    counts = pull_counts_at_step(trial_csv, step)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(np.arange(len(counts)), counts)
    ax.set_xlabel("arm")
    ax.set_ylabel(f"samples drawn by step {step}")
    ax.set_xticks(np.arange(len(counts)))
    fig.tight_layout()
    fig.savefig(output)
    return fig
