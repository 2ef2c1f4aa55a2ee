"""Bonus-formula tests against arbitrary-precision oracles (mpmath, 50 digits)."""

import math

import mpmath
import numpy as np
import pytest

from banditeval import bonus, scores
from banditeval.errors import ConfigError, InsufficientDataError

mpmath.mp.dps = 50


def mp_delta_mu(n, trace_cov_sq, spec_norm, delta):
    log6 = mpmath.log(6 / mpmath.mpf(delta))
    inner = mpmath.sqrt(8 * mpmath.mpf(trace_cov_sq) * log6) + 8 * spec_norm * log6
    return mpmath.sqrt(inner / n)


def mp_delta_sigma(n, trace_cov_sq, spec_norm, eff_rank, kappa, delta):
    log3 = mpmath.log(3 / mpmath.mpf(delta))
    dmu = mp_delta_mu(n, trace_cov_sq, spec_norm, delta)
    return 20 * kappa**2 * spec_norm * mpmath.sqrt((4 * eff_rank + log3) / n) + dmu**2


def mp_fd_bonus(s, trace_sqrt_ref, kappa, delta):
    log6 = mpmath.log(6 / mpmath.mpf(delta))
    dmu = mp_delta_mu(s.n, s.trace_cov_sq_sqrt**2, s.spec_norm, delta)
    dsig = mp_delta_sigma(
        s.n, s.trace_cov_sq_sqrt**2, s.spec_norm, s.eff_rank, kappa, delta
    )
    return (
        2 * dmu * (dmu + s.mean_dist_ref)
        + trace_sqrt_ref * mpmath.sqrt(8 * dsig)
        + s.trace_cov * mpmath.sqrt(8 * log6 / s.n)
        + 8 * s.spec_norm * log6 / s.n
    )


def make_summary(rng, n=200):
    a = rng.standard_normal((5, 5))
    cov = a @ a.T / 5
    return bonus.ArmMomentSummary.from_cov(n, cov, float(rng.uniform(0, 3)))


def test_delta_mu_matches_oracle():
    rng = np.random.default_rng(0)
    p = bonus.BonusParams(delta=1e-4)
    for _ in range(10):
        s = make_summary(rng, n=int(rng.integers(2, 5000)))
        want = mp_delta_mu(s.n, s.trace_cov_sq_sqrt**2, s.spec_norm, p.delta)
        assert bonus.delta_mu(s, p) == pytest.approx(float(want), rel=1e-12)


def test_delta_sigma_matches_oracle():
    rng = np.random.default_rng(1)
    p = bonus.BonusParams(delta=0.05, kappa=1.7)
    for _ in range(10):
        s = make_summary(rng, n=int(rng.integers(2, 5000)))
        want = mp_delta_sigma(
            s.n, s.trace_cov_sq_sqrt**2, s.spec_norm, s.eff_rank, p.kappa, p.delta
        )
        assert bonus.delta_sigma(s, p) == pytest.approx(float(want), rel=1e-12)


def test_fd_bonus_matches_oracle():
    rng = np.random.default_rng(2)
    p = bonus.BonusParams(delta=1e-4, kappa=1.0)
    for _ in range(10):
        s = make_summary(rng, n=int(rng.integers(2, 5000)))
        want = mp_fd_bonus(s, 3.3, p.kappa, p.delta)
        assert bonus.fd_bonus(s, 3.3, p) == pytest.approx(float(want), rel=1e-12)


def test_fd_bonus_bounded_matches_oracle():
    rng = np.random.default_rng(3)
    p = bonus.BonusParams(delta=1e-3, kappa=1.0, mode=bonus.BOUNDED_NORM, norm_bound=2.0)
    dim = 5
    for _ in range(10):
        s = make_summary(rng, n=int(rng.integers(2, 5000)))
        c = mpmath.mpf(p.norm_bound)
        log6d = mpmath.log(6 * dim / mpmath.mpf(p.delta))
        log3 = mpmath.log(3 / mpmath.mpf(p.delta))
        d1 = mpmath.sqrt(2 * dim * c**2 * log6d / s.n + mpmath.mpf(s.trace_cov) / s.n)
        d2 = (
            20 * p.kappa**2 * s.spec_norm * mpmath.sqrt((4 * s.eff_rank + log3) / s.n)
            + d1**2
        )
        want = (
            2 * (d1 + s.mean_dist_ref) * d1
            + mpmath.mpf("3.3") * mpmath.sqrt(8 * d2)
            + 4 * c**2 * mpmath.sqrt(log3 / (2 * s.n))
        )
        assert bonus.fd_bonus_bounded(s, dim, 3.3, p) == pytest.approx(
            float(want), rel=1e-12
        )


def test_bonus_decreases_in_n():
    rng = np.random.default_rng(4)
    p = bonus.BonusParams(delta=1e-4)
    a = rng.standard_normal((4, 4))
    cov = a @ a.T / 4
    values = [
        bonus.fd_bonus(bonus.ArmMomentSummary.from_cov(n, cov, 1.0), 2.0, p)
        for n in (10, 100, 1000, 10000)
    ]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_naive_summary_uses_dimension_constants():
    s = bonus.naive_summary(100, 16)
    assert s.trace_cov == 16.0
    assert s.trace_cov_sq_sqrt == pytest.approx(4.0)
    assert s.spec_norm == 1.0 and s.eff_rank == 16.0 and s.mean_dist_ref == 0.0
    p = bonus.BonusParams(delta=0.01)
    assert bonus.naive_bonus_fd(100, 16, 2.0, p) == pytest.approx(
        bonus.fd_bonus(s, 2.0, p), rel=1e-15
    )


def test_zero_covariance_summary_has_zero_widths():
    s = bonus.ArmMomentSummary.from_cov(50, np.zeros((3, 3)), 0.0)
    p = bonus.BonusParams(delta=0.1)
    assert bonus.delta_mu(s, p) == 0.0
    assert bonus.delta_sigma(s, p) == 0.0
    assert bonus.fd_bonus(s, 2.0, p) == 0.0


def test_epsilon_vector_matches_oracle():
    rng = np.random.default_rng(5)
    n, d, delta = 150, 8, 1e-3
    v = rng.uniform(0, 0.25, d)
    got = bonus.is_epsilon_vector(v, n, d, delta)
    log4d = mpmath.log(4 * d / mpmath.mpf(delta))
    for j in range(d):
        want = mpmath.sqrt(2 * mpmath.mpf(v[j]) * log4d / n) + 7 * log4d / (3 * (n - 1))
        assert got[j] == pytest.approx(float(want), rel=1e-12)


def test_bernstein_bound_matches_oracle():
    log2 = mpmath.log(2 / mpmath.mpf("0.1"))
    want = mpmath.sqrt(2 * mpmath.mpf("0.08") * log2 / 50) + 7 * log2 / (3 * 49)
    assert bonus.bernstein_bound(0.08, 50, 0.1) == pytest.approx(float(want), rel=1e-12)
    with pytest.raises(InsufficientDataError):
        bonus.bernstein_bound(0.1, 1, 0.1)


def test_entropy_bonus_matches_oracle():
    n, d, delta = 300, 10, 1e-4
    log4d = mpmath.log(4 * d / mpmath.mpf(delta))
    want = mpmath.sqrt(2 * mpmath.mpf("0.4") * log4d / n) + (
        7 * mpmath.log(d) / (3 * (n - 1))
    ) * log4d
    assert bonus.is_entropy_bonus(0.4, n, d, delta) == pytest.approx(
        float(want), rel=1e-12
    )


def make_is_summary(rng, n=400, d=6):
    probs = rng.dirichlet(np.ones(d), size=n)
    ents = np.array([scores.entropy_functional(r) for r in probs])
    return bonus.IsSummary(
        n=n,
        d=d,
        mean_cond_probs=probs.mean(axis=0),
        per_class_variances=probs.var(axis=0, ddof=1),
        cond_entropy_mean=float(ents.mean()),
        cond_entropy_variance=float(ents.var(ddof=1)),
    )


def test_optimistic_is_dominates_empirical():
    rng = np.random.default_rng(6)
    for _ in range(20):
        s = make_is_summary(rng)
        emp = math.exp(
            scores.entropy_functional(s.mean_cond_probs) - s.cond_entropy_mean
        )
        assert bonus.optimistic_is(s, 0.05) >= emp


def test_optimistic_is_matches_composed_oracle():
    rng = np.random.default_rng(7)
    s = make_is_summary(rng)
    delta = 0.01
    eps = bonus.is_epsilon_vector(s.per_class_variances, s.n, s.d, delta)
    p_hat = scores.clip_toward_inv_e(s.mean_cond_probs, eps)
    want = math.exp(
        scores.entropy_functional(p_hat)
        - s.cond_entropy_mean
        + bonus.is_entropy_bonus(s.cond_entropy_variance, s.n, s.d, delta)
    )
    assert bonus.optimistic_is(s, delta) == pytest.approx(want, rel=1e-15)


def test_naive_is_summary_substitutes_constants():
    rng = np.random.default_rng(8)
    s = bonus.naive_is_summary(make_is_summary(rng, d=10))
    np.testing.assert_array_equal(s.per_class_variances, np.ones(10))
    assert s.cond_entropy_variance == pytest.approx(math.log(10) ** 2)


def test_bonus_params_validation():
    with pytest.raises(ConfigError):
        bonus.BonusParams(delta=0.0)
    with pytest.raises(ConfigError):
        bonus.BonusParams(delta=0.1, kappa=-1.0)
    with pytest.raises(ConfigError):
        bonus.BonusParams(delta=0.1, mode=bonus.BOUNDED_NORM)
