"""Sample sources the bandit pulls from.

Synthetic arms (Gaussian, categorical) carry closed-form true scores so that
regret is exact; replay arms serve rows from a precomputed embedding matrix.
Each arm owns a seeded generator, so its sample stream depends only on its own
seed and pull history, never on the interleaving with other arms.
"""

from __future__ import annotations

import math

import numpy as np

from . import matstats, scores
from .errors import ArmExhaustedError, DimensionMismatchError

FD_KIND = "fd"
IS_KIND = "is"


class GaussianArm:
    """Arm emitting embeddings from N(mean, cov)."""

    kind = FD_KIND

    def __init__(self, mean: np.ndarray, cov: np.ndarray, rng_seed: int):
        self.mean = np.asarray(mean, dtype=float)
        self.cov = matstats.symmetrize(cov)
        if self.mean.shape != (self.cov.shape[0],):
            raise DimensionMismatchError("arm mean/cov dimensions disagree")
        self.cov_factor = matstats.psd_sqrt_factor(self.cov)
        self.rng_seed = int(rng_seed)
        self._rng = np.random.default_rng(self.rng_seed)

    @property
    def dim(self) -> int:
        return len(self.mean)

    def pull(self, batch_size: int) -> np.ndarray:
        if batch_size < 1:
            raise DimensionMismatchError("batch size must be >= 1")
        z = self._rng.standard_normal((batch_size, self.dim))
        return self.mean + z @ self.cov_factor.T

    def true_fd(self, ref: scores.RefStats) -> float:
        return scores.frechet_distance(self.mean, self.cov, ref)

    def truncate_variance(self, factor: float) -> "GaussianArm":
        """Variance-controlled copy: covariance scaled by factor^2."""
        if not 0.0 < factor <= 1.0:
            raise DimensionMismatchError("truncation factor must lie in (0, 1]")
        return GaussianArm(self.mean, self.cov * factor**2, self.rng_seed)


class CategoricalArm:
    """Arm emitting conditional class distributions from a finite mixture.

    Each pull draws prototype rows i.i.d. by weight; the true IS is closed
    form over the finite support.
    """

    kind = IS_KIND

    def __init__(self, prototypes: np.ndarray, weights: np.ndarray, rng_seed: int):
        self.prototypes = np.atleast_2d(np.asarray(prototypes, dtype=float))
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (self.prototypes.shape[0],):
            raise DimensionMismatchError("one weight per prototype required")
        if np.any(self.prototypes < 0) or np.any(
            np.abs(self.prototypes.sum(axis=1) - 1.0) > 1e-9
        ):
            raise DimensionMismatchError("prototypes must be probability vectors")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise DimensionMismatchError("weights must form a probability vector")
        self.rng_seed = int(rng_seed)
        self._rng = np.random.default_rng(self.rng_seed)

    @property
    def d(self) -> int:
        return self.prototypes.shape[1]

    def pull(self, batch_size: int) -> np.ndarray:
        if batch_size < 1:
            raise DimensionMismatchError("batch size must be >= 1")
        idx = self._rng.choice(len(self.weights), size=batch_size, p=self.weights)
        return self.prototypes[idx]

    def true_is(self) -> float:
        marginal = self.weights @ self.prototypes
        cond = sum(
            w * scores.entropy_functional(proto)
            for w, proto in zip(self.weights, self.prototypes)
        )
        return math.exp(scores.entropy_functional(marginal) - cond)


class ReplayArm:
    """Arm replaying rows of a stored embedding matrix."""

    kind = FD_KIND

    def __init__(self, data: np.ndarray, rng_seed: int, with_replacement: bool = True):
        self.data = np.atleast_2d(np.asarray(data, dtype=float))
        self.with_replacement = with_replacement
        self.rng_seed = int(rng_seed)
        self._rng = np.random.default_rng(self.rng_seed)
        self._order = None
        self._cursor = 0
        if not with_replacement:
            self._order = self._rng.permutation(len(self.data))

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def pull(self, batch_size: int) -> np.ndarray:
        if batch_size < 1:
            raise DimensionMismatchError("batch size must be >= 1")
        if self.with_replacement:
            idx = self._rng.integers(0, len(self.data), size=batch_size)
            return self.data[idx]
        if self._cursor + batch_size > len(self.data):
            raise ArmExhaustedError(
                f"replay arm exhausted: {len(self.data) - self._cursor} rows left, "
                f"{batch_size} requested"
            )
        idx = self._order[self._cursor : self._cursor + batch_size]
        self._cursor += batch_size
        return self.data[idx]

    def full_empirical_fd(self, ref: scores.RefStats) -> float:
        """Empirical FD of the whole dataset; ground truth for replay regret."""
        moments = matstats.StreamingMoments(self.dim).update(self.data)
        return scores.frechet_distance(moments.mean, moments.covariance(), ref)


def categorical_weights_for_is(target_is: float, support: int) -> np.ndarray:
    """Weights (w, u, ..., u) over `support` one-hot prototypes with the given IS.

    The arm built from one-hot prototypes has IS = exp(H(weights)); the first
    weight is found by bisection on the decreasing branch H([w, uniform rest]).
    """
    if not 1.0 <= target_is <= support + 1e-12:
        raise DimensionMismatchError("target IS must lie in [1, support]")
    target_h = math.log(target_is)

    def entropy_at(w1: float) -> float:
        rest = (1.0 - w1) / (support - 1)
        vec = np.full(support, rest)
        vec[0] = w1
        return scores.entropy_functional(vec)

    lo, hi = 1.0 / support, 1.0 - 1e-12
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if entropy_at(mid) > target_h:
            lo = mid
        else:
            hi = mid
    w1 = 0.5 * (lo + hi)
    out = np.full(support, (1.0 - w1) / (support - 1))
    out[0] = w1
    return out
