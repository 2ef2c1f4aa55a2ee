"""Empirical Frechet distance and Inception-style score, plus building blocks.

All entropies use the natural logarithm; the clip operator targets 1/e, the
maximizer of u(z) = -z*log(z), so any other base would break its optimism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matstats
from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    NotPositiveDefiniteError,
    NumericalError,
)

INV_E = math.exp(-1.0)

# Raw FD values below this are numerical-integrity failures, not cancellation.
_FD_NEGATIVE_TOL = -1e-6


@dataclass(frozen=True)
class RefStats:
    """Reference (real-data) statistics for FD scoring.

    ``chol`` and ``trace_sqrt_ref`` = Tr[cov^{1/2}] are precomputed once so
    per-step scoring only decomposes the generator side.
    """

    dim: int
    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray
    trace_sqrt_ref: float

    @classmethod
    def from_mean_cov(cls, mean: np.ndarray, cov: np.ndarray) -> "RefStats":
        mean = np.asarray(mean, dtype=float)
        cov = matstats.symmetrize(cov)
        if mean.shape != (cov.shape[0],):
            raise DimensionMismatchError("reference mean/cov dimensions disagree")
        chol = matstats.cholesky(cov)  # raises if not positive definite
        vals, _ = matstats.sym_eigen(cov)
        trace_sqrt = float(np.sqrt(np.clip(vals, 0.0, None)).sum())
        return cls(dim=len(mean), mean=mean, cov=cov, chol=chol, trace_sqrt_ref=trace_sqrt)


@dataclass(frozen=True)
class ClassProfile:
    """Per-sample conditional class distributions and their entropies."""

    cond_probs: np.ndarray  # shape (n, d), rows sum to 1
    cond_entropies: np.ndarray  # shape (n,)

    @classmethod
    def from_probs(cls, cond_probs: np.ndarray) -> "ClassProfile":
        probs = np.atleast_2d(np.asarray(cond_probs, dtype=float))
        ents = np.array([entropy_functional(row) for row in probs])
        return cls(cond_probs=probs, cond_entropies=ents)

    @property
    def n(self) -> int:
        return self.cond_probs.shape[0]

    @property
    def d(self) -> int:
        return self.cond_probs.shape[1]


def frechet_distance(mean_g: np.ndarray, cov_g: np.ndarray, ref: RefStats) -> float:
    """||mu_g - mu_r||^2 + Tr[S_g + S_r - 2 (S_g S_r)^{1/2}], clamped at 0."""
    mean_g = np.asarray(mean_g, dtype=float)
    cov_g = matstats.symmetrize(cov_g)
    if mean_g.shape != (ref.dim,) or cov_g.shape != (ref.dim, ref.dim):
        raise DimensionMismatchError(
            f"generator stats of dim {mean_g.shape} do not match reference dim {ref.dim}"
        )
    cross = matstats.trace_sqrt_product(cov_g, ref.chol)
    value = (
        float(np.dot(mean_g - ref.mean, mean_g - ref.mean))
        + float(np.trace(cov_g))
        + float(np.trace(ref.cov))
        - 2.0 * cross
    )
    if value < _FD_NEGATIVE_TOL:
        raise NumericalError(f"FD evaluated to {value:.3e}, beyond cancellation tolerance")
    return max(value, 0.0)


def entropy_functional(z: np.ndarray) -> float:
    """-sum_j z[j] * log(z[j]) with the 0*log(0) = 0 convention."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise NotPositiveDefiniteError("entropy functional requires non-negative entries")
    pos = z[z > 0]
    return float(-(pos * np.log(pos)).sum())


def empirical_is(profile: ClassProfile) -> float:
    """exp{ H(mean conditional) - mean(conditional entropies) }."""
    if profile.n < 1:
        raise InsufficientDataError("empirical IS needs at least one sample")
    marginal = profile.cond_probs.mean(axis=0)
    return math.exp(entropy_functional(marginal) - float(profile.cond_entropies.mean()))


def sample_variance(values: np.ndarray) -> float:
    """Unbiased sample variance, equal to the pairwise-difference form."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise InsufficientDataError("sample variance needs n >= 2")
    return float(np.var(values, ddof=1))


def clip_toward_inv_e(p: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Move each entry of p toward 1/e by eps, saturating at 1/e.

    Output entries are strictly positive whenever eps[j] > 0 or p[j] > 0.
    """
    p = np.asarray(p, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if p.shape != eps.shape:
        raise DimensionMismatchError("p and eps must have equal lengths")
    gap = INV_E - p
    moved = p + np.sign(gap) * eps
    return np.where(np.abs(gap) >= eps, moved, INV_E)
