"""Experiment configuration: YAML loading, validation, and defaults."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from .bandit import FD_UCB, IS_UCB, POLICY_KINDS
from .bonus import BOUNDED_NORM, PLUGIN
from .errors import ConfigError

VALID_METRICS = ("fd", "is")
VALID_ARM_TYPES = ("gaussian", "categorical", "replay")


@dataclass
class ExperimentConfig:
    metric: str
    arms: list = field(default_factory=list)
    policies: list = field(default_factory=lambda: [FD_UCB])
    steps: int = 1000
    batch_size: int = 5
    delta: float = 0.1  # total failure budget; the runner divides by steps
    trials: int = 20
    seed: int = 0
    kappa: float = 1.0
    bonus_mode: str = PLUGIN
    norm_bound: float | None = None
    threshold_mult: float = 0.0
    burn_in: int = 0
    workers: int = 1
    reference: dict | None = None
    output_dir: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.metric not in VALID_METRICS:
            raise ConfigError(f"metric must be one of {VALID_METRICS}, got {self.metric!r}")
        if not self.arms:
            raise ConfigError("at least one arm is required")
        if not self.policies:
            raise ConfigError("at least one policy is required")
        for kind in self.policies:
            if kind not in POLICY_KINDS:
                raise ConfigError(f"unknown policy {kind!r}")
            if self.metric == "fd" and kind == IS_UCB:
                raise ConfigError("is_ucb is incompatible with metric 'fd'")
            if self.metric == "is" and kind == FD_UCB:
                raise ConfigError("fd_ucb is incompatible with metric 'is'")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.kappa <= 0:
            raise ConfigError("kappa must be positive")
        if self.bonus_mode not in (PLUGIN, BOUNDED_NORM):
            raise ConfigError(f"unknown bonus_mode {self.bonus_mode!r}")
        if self.bonus_mode == BOUNDED_NORM and not self.norm_bound:
            raise ConfigError("bonus_mode 'bounded_norm' requires norm_bound")
        if self.threshold_mult < 0:
            raise ConfigError("threshold_mult must be >= 0")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for i, spec in enumerate(self.arms):
            self._validate_arm(i, spec)
        if self.metric == "fd" and self.reference is None:
            raise ConfigError("metric 'fd' requires a reference section")

    def _validate_arm(self, i: int, spec) -> None:
        if not isinstance(spec, dict) or "type" not in spec:
            raise ConfigError(f"arms[{i}] must be a mapping with a 'type' key")
        kind = spec["type"]
        if kind not in VALID_ARM_TYPES:
            raise ConfigError(f"arms[{i}].type must be one of {VALID_ARM_TYPES}")
        if self.metric == "is" and kind != "categorical":
            raise ConfigError(f"arms[{i}]: metric 'is' requires categorical arms")
        if self.metric == "fd" and kind == "categorical":
            raise ConfigError(f"arms[{i}]: categorical arms need metric 'is'")
        if kind == "gaussian" and ("mean" not in spec or "cov" not in spec):
            raise ConfigError(f"arms[{i}]: gaussian arms need 'mean' and 'cov'")
        if kind == "categorical" and ("prototypes" not in spec or "weights" not in spec):
            raise ConfigError(f"arms[{i}]: categorical arms need 'prototypes' and 'weights'")
        if kind == "replay" and "path" not in spec:
            raise ConfigError(f"arms[{i}]: replay arms need 'path'")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**raw)


def parse_cov_spec(spec) -> np.ndarray:
    """Covariance given as a full matrix, {diag: [...]}, or {scale: s, dim: d}."""
    if isinstance(spec, dict):
        if "diag" in spec:
            return np.diag(np.asarray(spec["diag"], dtype=float))
        if "scale" in spec and "dim" in spec:
            return float(spec["scale"]) * np.eye(int(spec["dim"]))
        raise ConfigError(f"unrecognized covariance spec keys {sorted(spec)}")
    arr = np.asarray(spec, dtype=float)
    if arr.ndim != 2:
        raise ConfigError("covariance matrix must be two-dimensional")
    return arr


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"could not parse {path}{line}: {exc}") from exc
    return ExperimentConfig.from_dict(raw)


def save_config(config: ExperimentConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=True)
