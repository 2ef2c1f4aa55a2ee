"""Embedding file IO and reference-statistics computation.

Binary format "EMB1": 4 magic bytes, u32-LE dim, u64-LE count, then
count*dim float32-LE values row-major. Round-trips float32 data bit-exactly.
A headered CSV of reals is accepted as a fallback input format.
"""

from __future__ import annotations

import struct

import numpy as np

from . import matstats
from .errors import ConfigError, NotPositiveDefiniteError
from .scores import RefStats

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sIQ")


def write_embeddings(path: str, data: np.ndarray) -> None:
    data = np.ascontiguousarray(np.atleast_2d(data), dtype="<f4")
    count, dim = data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, dim, count))
        fh.write(data.tobytes())


def read_embeddings_binary(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ConfigError(f"{path}: truncated header")
        magic, dim, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ConfigError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        payload = fh.read()
    expected = count * dim * 4
    if len(payload) != expected:
        raise ConfigError(
            f"{path}: truncated payload ({len(payload)} bytes, expected {expected})"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(count, dim).astype(float)


def read_embeddings_csv(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if len(lines) < 2:
        raise ConfigError(f"{path}: CSV needs a header row and at least one data row")
    width = len(lines[0].split(","))
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != width:
            raise ConfigError(f"{path}: ragged CSV row at line {lineno}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ConfigError(f"{path}: non-numeric value at line {lineno}") from exc
    return np.array(rows)


def load_embeddings(path: str) -> np.ndarray:
    """Load an EMB1 binary file, falling back to headered CSV."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_embeddings_binary(path)
    return read_embeddings_csv(path)


def compute_ref_stats(dataset: np.ndarray, ridge_scale: float = 1e-6) -> RefStats:
    """Mean/covariance reference statistics with an automatic PD ridge.

    When the sample covariance is not positive definite, ridge_scale times the
    mean diagonal entry is added to the diagonal before giving up.
    """
    data = np.atleast_2d(np.asarray(dataset, dtype=float))
    moments = matstats.StreamingMoments(data.shape[1]).update(data)
    cov = moments.covariance()
    try:
        return RefStats.from_mean_cov(moments.mean, cov)
    except NotPositiveDefiniteError:
        eps = ridge_scale * max(float(np.diag(cov).mean()), np.finfo(float).tiny)
        ridged = cov + eps * np.eye(cov.shape[0])
        try:
            return RefStats.from_mean_cov(moments.mean, ridged)
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(
                f"reference covariance stayed indefinite after ridge {eps:.3e}",
                pivot=exc.pivot,
            ) from exc


def save_ref_stats(path: str, ref: RefStats) -> None:
    np.savez(
        path,
        mean=ref.mean,
        cov=ref.cov,
        chol=ref.chol,
        trace_sqrt_ref=np.array(ref.trace_sqrt_ref),
    )


def load_ref_stats(path: str) -> RefStats:
    with np.load(path) as data:
        return RefStats(
            dim=len(data["mean"]),
            mean=data["mean"],
            cov=data["cov"],
            chol=data["chol"],
            trace_sqrt_ref=float(data["trace_sqrt_ref"]),
        )
