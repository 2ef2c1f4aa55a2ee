"""Dense symmetric linear algebra and streaming moment estimation.

Symmetric matrices are plain ``numpy`` arrays; :func:`symmetrize` enforces
exact symmetry after accumulation steps that can break it in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    NumericalError,
)

# Relative eigenvalue tolerance separating round-off from genuine indefiniteness.
PSD_TOL = 1e-8


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return the symmetric part 0.5*(M + M^T) of a square matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.T)


def _check_symmetric(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
    if not np.array_equal(m, m.T):
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.T).max() > 1e-12 * scale:
            raise DimensionMismatchError(f"{name} is not symmetric")
        m = symmetrize(m)
    return m


@dataclass
class StreamingMoments:
    """Streaming mean and deviation-scatter of a vector sample.

    ``scatter`` is the sum of outer products of deviations from the running
    mean (Welford-style), so ``covariance() = scatter / n`` with the
    population 1/n normalization.
    """

    dim: int
    count: int = 0
    mean: np.ndarray = field(default=None)  # type: ignore[assignment]
    scatter: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatchError("dim must be >= 1")
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        if self.scatter is None:
            self.scatter = np.zeros((self.dim, self.dim))

    def update(self, batch: np.ndarray) -> "StreamingMoments":
        """Fold a batch of row vectors into the moments (in place)."""
        batch = np.atleast_2d(np.asarray(batch, dtype=float))
        if batch.size == 0:
            return self
        if batch.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"batch vectors have length {batch.shape[1]}, expected {self.dim}"
            )
        m = batch.shape[0]
        batch_mean = batch.mean(axis=0)
        dev = batch - batch_mean
        batch_scatter = dev.T @ dev

        n = self.count
        total = n + m
        delta = batch_mean - self.mean
        self.scatter = symmetrize(
            self.scatter + batch_scatter + np.outer(delta, delta) * (n * m / total)
        )
        self.mean = self.mean + delta * (m / total)
        self.count = total
        return self

    def merge(self, other: "StreamingMoments") -> "StreamingMoments":
        """Return the moments of the concatenated samples."""
        if other.dim != self.dim:
            raise DimensionMismatchError("cannot merge moments of different dims")
        if other.count == 0:
            return StreamingMoments(self.dim, self.count, self.mean.copy(), self.scatter.copy())
        if self.count == 0:
            return StreamingMoments(other.dim, other.count, other.mean.copy(), other.scatter.copy())
        n, m = self.count, other.count
        total = n + m
        delta = other.mean - self.mean
        scatter = symmetrize(
            self.scatter + other.scatter + np.outer(delta, delta) * (n * m / total)
        )
        mean = self.mean + delta * (m / total)
        return StreamingMoments(self.dim, total, mean, scatter)

    def covariance(self) -> np.ndarray:
        """Population covariance (1/n normalization)."""
        if self.count < 1:
            raise DegenerateInputError("covariance undefined for empty moments")
        return self.scatter / self.count


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    Raises :class:`NotPositiveDefiniteError` carrying the failing pivot index.
    """
    a = _check_symmetric(m, "cholesky input")
    d = a.shape[0]
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pass
    # Locate the failing pivot with a row-by-row factorization.
    L = np.zeros((d, d))
    for j in range(d):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= 0.0:
            raise NotPositiveDefiniteError(
                f"Cholesky failed at pivot {j} (value {pivot:.3e})", pivot=j
            )
        L[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def sym_eigen(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix."""
    a = _check_symmetric(m, "sym_eigen input")
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed to converge: {exc}") from exc
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def trace_sqrt_product(a: np.ndarray, b_chol: np.ndarray) -> float:
    """Tr[(A B)^{1/2}] for PSD A and B given through B's Cholesky factor.

    A*B shares its spectrum with L^T A L, which is symmetric PSD, so the value
    is the sum of square roots of that matrix's eigenvalues.
    """
    a = _check_symmetric(a, "trace_sqrt_product input")
    L = np.asarray(b_chol, dtype=float)
    if L.shape[0] != a.shape[0]:
        raise DimensionMismatchError(
            f"factor dim {L.shape[0]} does not match matrix dim {a.shape[0]}"
        )
    prod = symmetrize(L.T @ a @ L)
    vals, _ = sym_eigen(prod)
    if len(vals) and vals[-1] < -PSD_TOL * max(abs(vals[0]), abs(vals[-1])):
        raise NotPositiveDefiniteError(
            f"input is not PSD: eigenvalue {vals[-1]:.3e} below tolerance"
        )
    return float(np.sqrt(np.clip(vals, 0.0, None)).sum())


def spectral_norm(m: np.ndarray) -> float:
    """Largest absolute eigenvalue of a symmetric matrix."""
    vals, _ = sym_eigen(m)
    return float(np.abs(vals).max()) if len(vals) else 0.0


def effective_rank(m: np.ndarray) -> float:
    """Tr[M] / ||M||_2 for a nonzero PSD matrix; lies in [1, dim]."""
    a = _check_symmetric(m, "effective_rank input")
    norm = spectral_norm(a)
    if norm == 0.0:
        raise DegenerateInputError("effective rank undefined for the zero matrix")
    return float(np.trace(a) / norm)


def threshold_covariance(m: np.ndarray, n: int, threshold_mult: float) -> np.ndarray:
    """Adaptive thresholding of off-diagonal covariance entries.

    Entry (i, j), i != j, is zeroed when |m_ij| falls below
    ``threshold_mult * sqrt(log(dim)/n) * sqrt(m_ii * m_jj)``.
    """
    a = _check_symmetric(m, "threshold input")
    if n < 2:
        raise DimensionMismatchError("thresholding requires n >= 2")
    if threshold_mult < 0:
        raise DimensionMismatchError("threshold multiplier must be >= 0")
    d = a.shape[0]
    diag = np.diag(a).copy()
    scale = np.sqrt(np.outer(np.abs(diag), np.abs(diag)))
    cutoff = threshold_mult * np.sqrt(np.log(d) / n) * scale
    out = np.where(np.abs(a) >= cutoff, a, 0.0)
    np.fill_diagonal(out, diag)
    return symmetrize(out)


def psd_sqrt_factor(m: np.ndarray) -> np.ndarray:
    """Factor F with F F^T = M for PSD M, via eigendecomposition.

    Unlike Cholesky this tolerates singular matrices; eigenvalues within
    round-off below zero are clamped.
    """
    vals, vecs = sym_eigen(m)
    if len(vals) and vals[-1] < -PSD_TOL * max(abs(vals[0]), 1e-300):
        raise NotPositiveDefiniteError(
            f"matrix is not PSD: eigenvalue {vals[-1]:.3e} below tolerance"
        )
    return vecs * np.sqrt(np.clip(vals, 0.0, None))
