"""Figures from bandit experiment result CSVs."""

from .plots import PlotSpec, plot_curves, plot_pull_distribution, read_aggregate

__version__ = "0.1.0"

__all__ = ["PlotSpec", "plot_curves", "plot_pull_distribution", "read_aggregate"]
