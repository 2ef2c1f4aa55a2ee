"""Arm sampling distributions, closed-form true scores, and determinism."""

import numpy as np
import pytest
import scipy.stats

from banditeval import matstats, scores
from banditeval.arms import (
    CategoricalArm,
    GaussianArm,
    ReplayArm,
    categorical_weights_for_is,
)
from banditeval.errors import ArmExhaustedError, DimensionMismatchError


def test_gaussian_arm_moments_converge():
    mean = np.array([1.0, -2.0, 0.5])
    cov = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, -0.2], [0.0, -0.2, 0.5]])
    arm = GaussianArm(mean, cov, rng_seed=42)
    sample = arm.pull(200_000)
    np.testing.assert_allclose(sample.mean(axis=0), mean, atol=0.02)
    np.testing.assert_allclose(np.cov(sample.T, ddof=0), cov, atol=0.03)


def test_gaussian_arm_standardized_mean_is_plausible():
    # With known covariance the scaled mean error is chi-square distributed;
    # 5 sigma on each coordinate is an essentially certain bound.
    arm = GaussianArm(np.zeros(4), 2.0 * np.eye(4), rng_seed=7)
    n = 10_000
    mean = arm.pull(n).mean(axis=0)
    assert np.all(np.abs(mean) < 5.0 * np.sqrt(2.0 / n))


def test_gaussian_true_fd_and_truncation():
    ref = scores.RefStats.from_mean_cov(np.zeros(2), np.eye(2))
    arm = GaussianArm(np.array([3.0, 4.0]), np.eye(2), rng_seed=0)
    assert arm.true_fd(ref) == pytest.approx(25.0)
    half = arm.truncate_variance(0.5)
    np.testing.assert_allclose(half.cov, 0.25 * np.eye(2))
    with pytest.raises(DimensionMismatchError):
        arm.truncate_variance(1.5)


def test_gaussian_arm_deterministic_per_seed():
    a = GaussianArm(np.zeros(2), np.eye(2), rng_seed=9)
    b = GaussianArm(np.zeros(2), np.eye(2), rng_seed=9)
    np.testing.assert_array_equal(a.pull(50), b.pull(50))


def test_gaussian_arm_accepts_singular_cov():
    arm = GaussianArm(np.zeros(2), np.zeros((2, 2)), rng_seed=1)
    np.testing.assert_array_equal(arm.pull(10), np.zeros((10, 2)))


def test_categorical_arm_frequencies_pass_gof():
    weights = np.array([0.5, 0.3, 0.2])
    protos = np.eye(3)
    arm = CategoricalArm(protos, weights, rng_seed=3)
    draws = arm.pull(30_000)
    observed = draws.sum(axis=0)
    _, p_value = scipy.stats.chisquare(observed, weights * 30_000)
    assert p_value > 1e-3


def test_categorical_true_is_closed_forms():
    protos = np.eye(5)
    uniform = CategoricalArm(protos, np.full(5, 0.2), rng_seed=0)
    assert uniform.true_is() == pytest.approx(5.0)
    single = CategoricalArm(np.array([[0.25, 0.25, 0.25, 0.25]]), np.array([1.0]), 0)
    assert single.true_is() == pytest.approx(1.0)


def test_categorical_arm_validation():
    with pytest.raises(DimensionMismatchError):
        CategoricalArm(np.array([[0.5, 0.6]]), np.array([1.0]), 0)  # rows must sum to 1
    with pytest.raises(DimensionMismatchError):
        CategoricalArm(np.eye(2), np.array([0.7, 0.7]), 0)


def test_weights_solver_hits_target_is():
    for target in (1.5, 3.0, 7.5):
        support = 8
        w = categorical_weights_for_is(target, support)
        arm = CategoricalArm(np.eye(support), w, rng_seed=0)
        assert arm.true_is() == pytest.approx(target, abs=1e-9)
    with pytest.raises(DimensionMismatchError):
        categorical_weights_for_is(9.0, 8)


def test_replay_without_replacement_covers_each_row_once():
    data = np.arange(12, dtype=float).reshape(6, 2)
    arm = ReplayArm(data, rng_seed=5, with_replacement=False)
    seen = np.vstack([arm.pull(2) for _ in range(3)])
    np.testing.assert_array_equal(np.sort(seen, axis=0), data)
    with pytest.raises(ArmExhaustedError):
        arm.pull(1)


def test_replay_with_replacement_deterministic():
    data = np.arange(10, dtype=float).reshape(5, 2)
    a = ReplayArm(data, rng_seed=8)
    b = ReplayArm(data, rng_seed=8)
    np.testing.assert_array_equal(a.pull(20), b.pull(20))


def test_replay_full_empirical_fd_matches_direct():
    rng = np.random.default_rng(11)
    data = rng.standard_normal((200, 3))
    ref = scores.RefStats.from_mean_cov(np.zeros(3), np.eye(3))
    arm = ReplayArm(data, rng_seed=0)
    mom = matstats.StreamingMoments(3).update(data)
    want = scores.frechet_distance(mom.mean, mom.covariance(), ref)
    assert arm.full_empirical_fd(ref) == pytest.approx(want, rel=1e-12)
