"""The online evaluation loop, selection policies, and regret accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bonus as bonus_mod
from . import matstats, scores
from .arms import FD_KIND, IS_KIND
from .bonus import BonusParams
from .errors import ConfigError, DimensionMismatchError

FD_UCB = "fd_ucb"
IS_UCB = "is_ucb"
NAIVE_UCB = "naive_ucb"
GREEDY = "greedy"
RANDOM = "random"
POLICY_KINDS = (FD_UCB, IS_UCB, NAIVE_UCB, GREEDY, RANDOM)


@dataclass(frozen=True)
class Policy:
    """Selection rule plus the bonus configuration it needs."""

    kind: str
    params: BonusParams
    burn_in: int = 0  # burn-in samples per arm, FD optimism policies only
    threshold_mult: float = 0.0  # covariance thresholding multiplier, 0 disables

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be >= 0")


class FdArmState:
    """Streaming statistics and scores of one embedding arm."""

    def __init__(self, arm_id: int, dim: int):
        self.arm_id = arm_id
        self.moments = matstats.StreamingMoments(dim)
        self.empirical_score = -math.inf
        self.optimistic_score = -math.inf
        self.last_bonus = math.inf

    @property
    def n(self) -> int:
        return self.moments.count

    def update(self, batch: np.ndarray) -> None:
        self.moments.update(batch)

    def rescore(self, policy: Policy, ref: scores.RefStats) -> None:
        # Below two samples the covariance is degenerate; the initialization
        # sentinel keeps the arm maximally attractive instead.
        if self.n < 2:
            return
        cov = self.moments.covariance()
        if policy.threshold_mult > 0:
            cov = matstats.threshold_covariance(cov, self.n, policy.threshold_mult)
        mean = self.moments.mean
        self.empirical_score = scores.frechet_distance(mean, cov, ref)
        if policy.kind in (GREEDY, RANDOM):
            self.last_bonus = 0.0
        elif policy.kind == NAIVE_UCB:
            self.last_bonus = bonus_mod.naive_bonus_fd(
                self.n, ref.dim, ref.trace_sqrt_ref, policy.params
            )
        else:
            summary = bonus_mod.ArmMomentSummary.from_cov(
                self.n, cov, float(np.linalg.norm(mean - ref.mean))
            )
            if policy.params.mode == bonus_mod.BOUNDED_NORM:
                self.last_bonus = bonus_mod.fd_bonus_bounded(
                    summary, ref.dim, ref.trace_sqrt_ref, policy.params
                )
            else:
                self.last_bonus = bonus_mod.fd_bonus(
                    summary, ref.trace_sqrt_ref, policy.params
                )
        self.optimistic_score = self.empirical_score - self.last_bonus


class IsArmState:
    """Streaming class-probability statistics and scores of one classifier arm."""

    def __init__(self, arm_id: int, d: int):
        self.arm_id = arm_id
        self.d = d
        self.n = 0
        self.mean_probs = np.zeros(d)
        self._m2_probs = np.zeros(d)
        self.ent_mean = 0.0
        self._ent_m2 = 0.0
        self.empirical_score = math.inf
        self.optimistic_score = math.inf
        self.last_bonus = math.inf

    def update(self, batch: np.ndarray) -> None:
        batch = np.atleast_2d(np.asarray(batch, dtype=float))
        if batch.shape[1] != self.d:
            raise DimensionMismatchError("conditional probability vectors of wrong width")
        for row in batch:
            self.n += 1
            delta = row - self.mean_probs
            self.mean_probs = self.mean_probs + delta / self.n
            self._m2_probs = self._m2_probs + delta * (row - self.mean_probs)
            h = scores.entropy_functional(row)
            dh = h - self.ent_mean
            self.ent_mean += dh / self.n
            self._ent_m2 += dh * (h - self.ent_mean)

    def summary(self) -> bonus_mod.IsSummary:
        return bonus_mod.IsSummary(
            n=self.n,
            d=self.d,
            mean_cond_probs=self.mean_probs,
            per_class_variances=self._m2_probs / (self.n - 1),
            cond_entropy_mean=self.ent_mean,
            cond_entropy_variance=self._ent_m2 / (self.n - 1),
        )

    def rescore(self, policy: Policy, ref=None) -> None:
        if self.n < 2:
            return  # keep the +inf sentinel: forced exploration
        self.empirical_score = math.exp(
            scores.entropy_functional(self.mean_probs) - self.ent_mean
        )
        if policy.kind in (GREEDY, RANDOM):
            self.last_bonus = 0.0
            self.optimistic_score = self.empirical_score
            return
        summary = self.summary()
        if policy.kind == NAIVE_UCB:
            summary = bonus_mod.naive_is_summary(summary)
        self.optimistic_score = bonus_mod.optimistic_is(summary, policy.params.delta)
        self.last_bonus = self.optimistic_score - self.empirical_score


@dataclass
class PolicyDecision:
    step: int
    arm_id: int
    optimistic_score: float
    empirical_score: float
    bonus: float
    counts: np.ndarray


@dataclass
class TrialLog:
    """Full trajectory of one trial with regret and OPR per step."""

    true_scores: np.ndarray
    best_arm: int
    burn_in_regret: float = 0.0
    decisions: list = field(default_factory=list)
    inst_regret: list = field(default_factory=list)
    cum_regret: list = field(default_factory=list)
    avg_regret: list = field(default_factory=list)
    opr: list = field(default_factory=list)

    def append(self, decision: PolicyDecision, gap: float, optimal_picks: int) -> None:
        t = decision.step
        prev = self.cum_regret[-1] if self.cum_regret else self.burn_in_regret
        self.decisions.append(decision)
        self.inst_regret.append(gap)
        self.cum_regret.append(prev + gap)
        self.avg_regret.append(self.cum_regret[-1] / t)
        self.opr.append(optimal_picks / t)

    def __len__(self) -> int:
        return len(self.decisions)


def select(policy: Policy, states: list, rng: np.random.Generator, metric: str) -> int:
    """Pick an arm index: argmin optimistic FD / argmax optimistic IS.

    Greedy uses the empirical score, random a uniform draw. Ties break to the
    lowest arm id (first occurrence).
    """
    if not states:
        raise ConfigError("cannot select from an empty arm set")
    if policy.kind == RANDOM:
        return int(rng.integers(len(states)))
    attr = "empirical_score" if policy.kind == GREEDY else "optimistic_score"
    values = np.array([getattr(s, attr) for s in states])
    return int(np.argmin(values)) if metric == FD_KIND else int(np.argmax(values))


class BanditLoop:
    """Sequential protocol state for one trial."""

    def __init__(
        self,
        arm_list: list,
        policy: Policy,
        true_scores: np.ndarray,
        batch_size: int,
        ref: scores.RefStats | None = None,
        rng: np.random.Generator | None = None,
    ):
        if batch_size < 1:
            raise ConfigError("batch size must be >= 1")
        kinds = {arm.kind for arm in arm_list}
        if len(kinds) != 1:
            raise ConfigError("all arms in a trial must share one metric kind")
        self.metric = kinds.pop()
        if self.metric == FD_KIND and ref is None:
            raise ConfigError("FD-mode trials require reference statistics")
        if self.metric == FD_KIND and policy.kind == IS_UCB:
            raise ConfigError("is_ucb cannot run on embedding arms")
        if self.metric == IS_KIND and policy.kind == FD_UCB:
            raise ConfigError("fd_ucb cannot run on classifier arms")
        self.arms = arm_list
        self.policy = policy
        self.batch_size = batch_size
        self.ref = ref
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.true_scores = np.asarray(true_scores, dtype=float)
        if self.metric == FD_KIND:
            self.best_arm = int(np.argmin(self.true_scores))
            self.best_score = float(self.true_scores.min())
            self.states = [FdArmState(i, arm.dim) for i, arm in enumerate(arm_list)]
        else:
            self.best_arm = int(np.argmax(self.true_scores))
            self.best_score = float(self.true_scores.max())
            self.states = [IsArmState(i, arm.d) for i, arm in enumerate(arm_list)]
        self.t = 0
        self.optimal_picks = 0
        self.log = TrialLog(true_scores=self.true_scores, best_arm=self.best_arm)

    def gap(self, arm_id: int) -> float:
        if self.metric == FD_KIND:
            return float(self.true_scores[arm_id] - self.best_score)
        return float(self.best_score - self.true_scores[arm_id])

    def burn_in(self) -> None:
        """Sample ``policy.burn_in`` points per arm before the policy steps.

        The regret charge counts those samples as burn_in/batch_size pulls per
        arm at its true gap, so the linear burn-in cost stays visible in logs.
        """
        n = self.policy.burn_in
        if n <= 0:
            return
        for i, arm in enumerate(self.arms):
            self.states[i].update(arm.pull(n))
            self.states[i].rescore(self.policy, self.ref)
            self.log.burn_in_regret += self.gap(i) * (n / self.batch_size)

    def step(self) -> PolicyDecision:
        self.t += 1
        unexplored = [s.arm_id for s in self.states if s.n == 0]
        if unexplored:
            chosen = min(unexplored)
        else:
            chosen = select(self.policy, self.states, self.rng, self.metric)
        state = self.states[chosen]
        state.update(self.arms[chosen].pull(self.batch_size))
        state.rescore(self.policy, self.ref)
        if chosen == self.best_arm:
            self.optimal_picks += 1
        decision = PolicyDecision(
            step=self.t,
            arm_id=chosen,
            optimistic_score=state.optimistic_score,
            empirical_score=state.empirical_score,
            bonus=state.last_bonus,
            counts=np.array([s.n for s in self.states]),
        )
        self.log.append(decision, self.gap(chosen), self.optimal_picks)
        return decision


def run_trial(
    arm_list: list,
    policy: Policy,
    steps: int,
    batch_size: int,
    true_scores: np.ndarray,
    ref: scores.RefStats | None = None,
    rng_seed: int = 0,
) -> TrialLog:
    """Run burn-in plus ``steps`` policy steps; deterministic per seed."""
    if steps < 0:
        raise ConfigError("steps must be >= 0")
    loop = BanditLoop(
        arm_list,
        policy,
        true_scores,
        batch_size,
        ref=ref,
        rng=np.random.default_rng(rng_seed),
    )
    loop.burn_in()
    for _ in range(steps):
        loop.step()
    return loop.log


def aggregate(logs: list[TrialLog]) -> dict:
    """Pointwise mean and standard error of avg-regret and OPR over trials."""
    if not logs:
        raise ConfigError("aggregate needs at least one trial log")
    lengths = {len(log) for log in logs}
    if len(lengths) != 1:
        raise DimensionMismatchError("trial logs have mismatched lengths")
    avg = np.array([log.avg_regret for log in logs])
    opr = np.array([log.opr for log in logs])
    k = len(logs)
    stderr = lambda a: (a.std(axis=0, ddof=1) / math.sqrt(k)) if k > 1 else np.zeros(a.shape[1])
    return {
        "step": np.arange(1, avg.shape[1] + 1),
        "avg_regret_mean": avg.mean(axis=0),
        "avg_regret_stderr": stderr(avg),
        "opr_mean": opr.mean(axis=0),
        "opr_stderr": stderr(opr),
    }
