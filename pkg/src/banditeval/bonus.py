"""Optimism bonuses and concentration widths for FD and IS scoring.

The FD bonus combines a mean-error width, a covariance spectral-error width,
and trace-concentration terms; the IS side uses empirical-Bernstein widths on
per-class probabilities and conditional entropies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matstats, scores
from .errors import ConfigError, InsufficientDataError

PLUGIN = "plugin"
BOUNDED_NORM = "bounded_norm"


@dataclass(frozen=True)
class BonusParams:
    """Failure probability (already divided by the horizon), kappa, and mode."""

    delta: float
    kappa: float = 1.0
    mode: str = PLUGIN
    norm_bound: float | None = None  # embedding norm bound C, bounded_norm mode only

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.kappa <= 0:
            raise ConfigError("kappa must be positive")
        if self.mode not in (PLUGIN, BOUNDED_NORM):
            raise ConfigError(f"unknown bonus mode {self.mode!r}")
        if self.mode == BOUNDED_NORM and (self.norm_bound is None or self.norm_bound <= 0):
            raise ConfigError("bounded_norm mode requires a positive norm bound")


@dataclass(frozen=True)
class ArmMomentSummary:
    """Covariance functionals of one arm entering the FD bonus.

    ``trace_cov_sq_sqrt`` is sqrt(Tr[S^2]), i.e. the Frobenius norm of S.
    """

    n: int
    trace_cov: float
    trace_cov_sq_sqrt: float
    spec_norm: float
    eff_rank: float
    mean_dist_ref: float

    @classmethod
    def from_cov(cls, n: int, cov: np.ndarray, mean_dist_ref: float) -> "ArmMomentSummary":
        cov = matstats.symmetrize(cov)
        spec = matstats.spectral_norm(cov)
        # A zero covariance carries no concentration error; rank 1 keeps the
        # summary in its valid range while the kappa term vanishes anyway.
        rank = matstats.effective_rank(cov) if spec > 0 else 1.0
        return cls(
            n=n,
            trace_cov=float(np.trace(cov)),
            trace_cov_sq_sqrt=float(np.linalg.norm(cov, "fro")),
            spec_norm=spec,
            eff_rank=rank,
            mean_dist_ref=mean_dist_ref,
        )


def naive_summary(n: int, dim: int) -> ArmMomentSummary:
    """Dimension-based stand-in used by Naive-UCB: Tr[S]=d, Tr[S^2]=d, ||S||=1."""
    return ArmMomentSummary(
        n=n,
        trace_cov=float(dim),
        trace_cov_sq_sqrt=math.sqrt(dim),
        spec_norm=1.0,
        eff_rank=float(dim),
        mean_dist_ref=0.0,
    )


def delta_mu(s: ArmMomentSummary, p: BonusParams) -> float:
    """High-probability L2 error width of the empirical mean."""
    if s.n < 1:
        raise InsufficientDataError("delta_mu needs n >= 1")
    log6 = math.log(6.0 / p.delta)
    inner = math.sqrt(8.0 * log6) * s.trace_cov_sq_sqrt + 8.0 * s.spec_norm * log6
    return math.sqrt(inner / s.n)


def delta_sigma(s: ArmMomentSummary, p: BonusParams) -> float:
    """High-probability spectral error width of the empirical covariance."""
    if s.n < 1:
        raise InsufficientDataError("delta_sigma needs n >= 1")
    log3 = math.log(3.0 / p.delta)
    dmu = delta_mu(s, p)
    return (
        20.0 * p.kappa**2 * s.spec_norm * math.sqrt((4.0 * s.eff_rank + log3) / s.n)
        + dmu * dmu
    )


def fd_bonus(s: ArmMomentSummary, trace_sqrt_ref: float, p: BonusParams) -> float:
    """Optimism bonus for the empirical FD (plugin / exact-parameter mode)."""
    log6 = math.log(6.0 / p.delta)
    dmu = delta_mu(s, p)
    dsig = delta_sigma(s, p)
    return (
        2.0 * dmu * (dmu + s.mean_dist_ref)
        + trace_sqrt_ref * math.sqrt(8.0 * dsig)
        + s.trace_cov * math.sqrt(8.0 * log6 / s.n)
        + 8.0 * s.spec_norm * log6 / s.n
    )


def fd_bonus_bounded(
    s: ArmMomentSummary, dim: int, trace_sqrt_ref: float, p: BonusParams
) -> float:
    """FD bonus for embeddings with a known L2 norm bound C."""
    if p.mode != BOUNDED_NORM:
        raise ConfigError("fd_bonus_bounded requires bounded_norm mode parameters")
    if s.n < 1:
        raise InsufficientDataError("fd_bonus_bounded needs n >= 1")
    c = p.norm_bound
    log6d = math.log(6.0 * dim / p.delta)
    log3 = math.log(3.0 / p.delta)
    d1 = math.sqrt(2.0 * dim * c * c * log6d / s.n + s.trace_cov / s.n)
    d2 = (
        20.0 * p.kappa**2 * s.spec_norm * math.sqrt((4.0 * s.eff_rank + log3) / s.n)
        + d1 * d1
    )
    return (
        2.0 * (d1 + s.mean_dist_ref) * d1
        + trace_sqrt_ref * math.sqrt(8.0 * d2)
        + 4.0 * c * c * math.sqrt(log3 / (2.0 * s.n))
    )


def naive_bonus_fd(n: int, dim: int, trace_sqrt_ref: float, p: BonusParams) -> float:
    """FD bonus with the data-independent dimension-based summary."""
    return fd_bonus(naive_summary(n, dim), trace_sqrt_ref, p)


def is_epsilon_vector(
    per_class_variances: np.ndarray, n: int, d: int, delta: float
) -> np.ndarray:
    """Empirical-Bernstein width per class for the marginal class distribution."""
    if n < 2:
        raise InsufficientDataError("epsilon vector needs n >= 2")
    v = np.asarray(per_class_variances, dtype=float)
    log4d = math.log(4.0 * d / delta)
    return np.sqrt(2.0 * np.clip(v, 0.0, None) * log4d / n) + (
        7.0 / (3.0 * (n - 1.0))
    ) * log4d


def bernstein_bound(variance: float, n: int, delta: float) -> float:
    """One-sided empirical-Bernstein width for [0,1]-valued i.i.d. samples."""
    if n < 2:
        raise InsufficientDataError("Bernstein bound needs n >= 2")
    log2 = math.log(2.0 / delta)
    return math.sqrt(2.0 * max(variance, 0.0) * log2 / n) + 7.0 * log2 / (3.0 * (n - 1.0))


@dataclass(frozen=True)
class IsSummary:
    """Sufficient statistics of one arm for the optimistic IS."""

    n: int
    d: int
    mean_cond_probs: np.ndarray  # empirical marginal class distribution
    per_class_variances: np.ndarray
    cond_entropy_mean: float
    cond_entropy_variance: float


def is_entropy_bonus(cond_entropy_variance: float, n: int, d: int, delta: float) -> float:
    """Additive exp-argument bonus for the conditional-entropy estimate."""
    if n < 2:
        raise InsufficientDataError("IS entropy bonus needs n >= 2")
    log4d = math.log(4.0 * d / delta)
    return math.sqrt(2.0 * max(cond_entropy_variance, 0.0) * log4d / n) + (
        7.0 * math.log(d) / (3.0 * (n - 1.0))
    ) * log4d


def optimistic_is(summary: IsSummary, delta: float) -> float:
    """Upper confidence value for the IS of one arm."""
    if summary.n < 2:
        raise InsufficientDataError("optimistic IS needs n >= 2")
    eps = is_epsilon_vector(summary.per_class_variances, summary.n, summary.d, delta)
    p_hat = scores.clip_toward_inv_e(summary.mean_cond_probs, eps)
    arg = (
        scores.entropy_functional(p_hat)
        - summary.cond_entropy_mean
        + is_entropy_bonus(summary.cond_entropy_variance, summary.n, summary.d, delta)
    )
    return math.exp(arg)


def naive_bonus_is(n: int, d: int, delta: float) -> float:
    """Entropy bonus with the data-independent variance (log d)^2."""
    return is_entropy_bonus(math.log(d) ** 2, n, d, delta)


def naive_is_summary(summary: IsSummary) -> IsSummary:
    """Replace the data-driven variances with the Naive-UCB constants."""
    return IsSummary(
        n=summary.n,
        d=summary.d,
        mean_cond_probs=summary.mean_cond_probs,
        per_class_variances=np.ones(summary.d),
        cond_entropy_mean=summary.cond_entropy_mean,
        cond_entropy_variance=math.log(summary.d) ** 2,
    )
