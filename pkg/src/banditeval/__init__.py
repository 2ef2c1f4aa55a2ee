"""Online generative-model selection with optimism-based bandit policies."""

from .arms import CategoricalArm, GaussianArm, ReplayArm, categorical_weights_for_is
from .bandit import (
    FD_UCB,
    GREEDY,
    IS_UCB,
    NAIVE_UCB,
    POLICY_KINDS,
    RANDOM,
    BanditLoop,
    Policy,
    TrialLog,
    aggregate,
    run_trial,
)
from .bonus import BOUNDED_NORM, PLUGIN, BonusParams, optimistic_is
from .config import ExperimentConfig, load_config, save_config
from .dataio import compute_ref_stats, load_embeddings, write_embeddings
from .errors import BanditEvalError
from .runner import check_bounds, run
from .scores import RefStats, empirical_is, frechet_distance

__version__ = "0.1.0"

__all__ = [
    "BOUNDED_NORM",
    "BanditEvalError",
    "BanditLoop",
    "BonusParams",
    "CategoricalArm",
    "ExperimentConfig",
    "FD_UCB",
    "GREEDY",
    "GaussianArm",
    "IS_UCB",
    "NAIVE_UCB",
    "PLUGIN",
    "POLICY_KINDS",
    "Policy",
    "RANDOM",
    "RefStats",
    "ReplayArm",
    "TrialLog",
    "aggregate",
    "categorical_weights_for_is",
    "check_bounds",
    "compute_ref_stats",
    "empirical_is",
    "frechet_distance",
    "load_config",
    "load_embeddings",
    "optimistic_is",
    "run",
    "run_trial",
    "save_config",
    "write_embeddings",
]
