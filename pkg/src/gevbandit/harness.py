"""Experiment orchestration and metrics.

A run steps one learner against one environment for ``horizon`` rounds;
an experiment repeats that ``repetitions`` times with independent random
streams and aggregates the results in repetition order.

Repetitions are simulated in lock-step as rows of 2-D arrays. Every
per-repetition computation is row-local, so a repetition's trajectory
does not depend on how repetitions are grouped into blocks or threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bandit import ESTIMATORS, MODES, sample_arm
from .choice_models import GnlModel, perspective_gradient
from .environments import ENV_STREAM, LEARNER_STREAM, AdversarialEnv, BernoulliEnv, rng_stream
from .errors import ConfigError

ALGORITHMS = ("bandit", "experts")


@dataclass(frozen=True)
class ExperimentConfig:
    model: GnlModel
    environment: BernoulliEnv | AdversarialEnv
    algorithm: str = "bandit"
    eta: float = 1.0
    horizon: int = 10_000
    repetitions: int = 100
    seed: int = 0
    mode: str = "reward"
    estimator: str = "sample-mean"
    bound: float = 1.0
    label: str = "run"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}", field="algorithm")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}", field="mode")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}", field="estimator")
        if not self.eta > 0:
            raise ConfigError("eta must be positive", field="eta", invariant="eta > 0")
        if int(self.horizon) < 1:
            raise ConfigError("horizon must be at least 1", field="horizon", invariant="T >= 1")
        if int(self.repetitions) < 1:
            raise ConfigError("repetitions must be at least 1", field="repetitions", invariant="B >= 1")
        if self.model.n != self.environment.n:
            raise ConfigError(
                f"model has {self.model.n} arms but the environment has {self.environment.n}",
                field="model", invariant="model arm count == environment arm count",
            )
        env = self.environment
        if isinstance(env, AdversarialEnv):
            if env.horizon < self.horizon:
                raise ConfigError(
                    f"reward matrix has {env.horizon} rows, horizon is {self.horizon}",
                    field="horizon", invariant="horizon <= reward matrix rows",
                )
            if self.algorithm == "bandit":
                r = env.rewards[: self.horizon]
                lo, hi = (-1.0, 0.0) if self.mode == "loss" else (0.0, 1.0)
                if r.min() < lo or r.max() > hi:
                    raise ConfigError(
                        f"{self.mode} mode needs rewards in [{lo}, {hi}]",
                        field="environment", invariant=f"rewards in [{lo}, {hi}]",
                    )


@dataclass
class RunTrace:
    """One repetition.

    For the bandit, ``plays`` counts pulls and ``observations`` equals
    ``plays``. For experts, ``arms`` is ``None``, ``plays`` holds the
    summed decision weights and every arm is observed every round.
    """

    arms: np.ndarray | None
    rewards: np.ndarray
    plays: np.ndarray
    reward_sums: np.ndarray
    observations: np.ndarray
    # best mean (Bernoulli, scalar) or best cumulative reward per step (adversarial)
    baseline: np.ndarray = field(repr=False)

    @property
    def horizon(self) -> int:
        return len(self.rewards)

    @property
    def total_reward(self) -> float:
        return math.fsum(self.rewards)

    def average_regret(self, steps=None) -> np.ndarray:
        """Average regret after each step (or after the given 1-based steps)."""
        t = np.arange(1, self.horizon + 1)
        best = self.baseline if self.baseline.ndim == 0 else self.baseline / t
        avg = best - np.cumsum(self.rewards) / t
        return avg if steps is None else avg[np.asarray(steps) - 1]


def stochastic_average_regret(trace: RunTrace, env: BernoulliEnv) -> float:
    """``max_i pi_i - total_reward / T``."""
    return env.best_mean - trace.total_reward / trace.horizon


def learnt_probabilities(trace: RunTrace) -> np.ndarray:
    """Empirical success rate per arm; ``nan`` marks arms never played."""
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(trace.observations > 0, trace.reward_sums / trace.observations, np.nan)


@dataclass
class AggregateResult:
    config: ExperimentConfig
    traces: list[RunTrace] = field(repr=False)
    checkpoints: np.ndarray
    mean_total_reward: float
    stderr_total_reward: float
    regret_mean: np.ndarray
    regret_stderr: np.ndarray
    mean_play_counts: np.ndarray
    learnt_probability: np.ndarray
    explored: np.ndarray

    @property
    def final_average_regret(self) -> float:
        return float(self.regret_mean[-1])

    @property
    def play_shares(self) -> np.ndarray:
        return self.mean_play_counts / self.config.horizon


def checkpoints(horizon: int, count: int = 40) -> np.ndarray:
    """Log-spaced steps in ``[1, horizon]`` plus every power of ten and ``horizon``."""
    steps = np.round(np.logspace(0, math.log10(horizon), count)).astype(np.int64)
    decades = 10 ** np.arange(int(math.log10(horizon)) + 1, dtype=np.int64)
    steps = np.concatenate([steps, decades, [horizon]])
    return np.unique(steps[(steps >= 1) & (steps <= horizon)])


def _simulate_bandit(config: ExperimentConfig, reps) -> dict:
    model, env, T = config.model, config.environment, int(config.horizon)
    B, n = len(reps), model.n
    learner_u = np.stack([rng_stream(config.seed, r, LEARNER_STREAM).random(T) for r in reps])
    bernoulli = isinstance(env, BernoulliEnv)
    if bernoulli:
        env_u = np.stack([rng_stream(config.seed, r, ENV_STREAM).random(T) for r in reps])
        pis = np.asarray(env.pis)
    rows = np.arange(B)
    U_hat = np.zeros((B, n))
    sums = np.zeros((B, n))
    plays = np.zeros((B, n), dtype=np.int64)
    arms = np.empty((B, T), dtype=np.int64)
    rewards = np.empty((B, T))
    sample_mean = config.estimator == "sample-mean"
    shift = -1.0 if bernoulli and config.mode == "loss" else 0.0
    for t in range(T):
        V = sums / np.maximum(plays, 1) if sample_mean else U_hat
        p = perspective_gradient(model, V, config.eta)
        a = sample_arm(p, learner_u[:, t])
        r = (env_u[:, t] < pis[a]).astype(float) if bernoulli else env.rewards[t, a]
        obs = r + shift
        U_hat[rows, a] += obs / p[rows, a]
        sums[rows, a] += obs
        plays[rows, a] += 1
        arms[:, t] = a
        rewards[:, t] = r
    # learnt probabilities refer to environment rewards, not learner losses
    env_sums = sums - shift * plays
    return {"arms": arms, "rewards": rewards, "plays": plays, "sums": env_sums}


def _simulate_experts(config: ExperimentConfig, reps) -> dict:
    model, env, T = config.model, config.environment, int(config.horizon)
    B, n = len(reps), model.n
    if isinstance(env, BernoulliEnv):
        pis = np.asarray(env.pis)
        u_all = np.stack([
            (rng_stream(config.seed, r, ENV_STREAM).random((T, n)) < pis).astype(float) for r in reps
        ])
    else:
        u_all = np.broadcast_to(env.rewards[:T], (B, T, n))
    U = np.zeros((B, n))
    mass = np.zeros((B, n))
    gains = np.empty((B, T))
    for t in range(T):
        x = perspective_gradient(model, U, config.eta)
        u = u_all[:, t]
        gains[:, t] = np.sum(x * u, axis=-1)
        mass += x
        U = U + u
    return {"rewards": gains, "plays": mass, "sums": U}


def _baseline(config: ExperimentConfig) -> np.ndarray:
    env = config.environment
    if isinstance(env, BernoulliEnv):
        return np.asarray(env.best_mean)
    return np.max(np.cumsum(env.rewards[: config.horizon], axis=0), axis=1)


def simulate(config: ExperimentConfig, reps=None) -> list[RunTrace]:
    """Simulate the given repetition indices (default: all) as one block."""
    reps = list(range(config.repetitions)) if reps is None else list(reps)
    baseline = _baseline(config)
    if config.algorithm == "bandit":
        out = _simulate_bandit(config, reps)
        return [RunTrace(out["arms"][b], out["rewards"][b], out["plays"][b], out["sums"][b],
                         out["plays"][b], baseline) for b in range(len(reps))]
    out = _simulate_experts(config, reps)
    seen = np.full(config.model.n, config.horizon, dtype=np.int64)
    return [RunTrace(None, out["rewards"][b], out["plays"][b], out["sums"][b], seen, baseline)
            for b in range(len(reps))]


def _fsum_mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def _stderr(values) -> float:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return math.nan
    m = _fsum_mean(values)
    var = math.fsum((values - m) ** 2) / (len(values) - 1)
    return math.sqrt(var / len(values))


def aggregate(config: ExperimentConfig, traces: list[RunTrace]) -> AggregateResult:
    """Fold per-repetition traces, always in repetition order."""
    steps = checkpoints(config.horizon)
    totals = [tr.total_reward for tr in traces]
    regret = np.stack([tr.average_regret(steps) for tr in traces])
    n = config.model.n
    plays = np.stack([tr.plays for tr in traces]).astype(float)
    observed = np.stack([tr.observations for tr in traces]).astype(float)
    sums = np.stack([tr.reward_sums for tr in traces])
    pooled_obs = np.array([math.fsum(observed[:, i]) for i in range(n)])
    pooled_sum = np.array([math.fsum(sums[:, i]) for i in range(n)])
    explored = pooled_obs > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        learnt = np.where(explored, pooled_sum / pooled_obs, np.nan)
    return AggregateResult(
        config=config,
        traces=traces,
        checkpoints=steps,
        mean_total_reward=_fsum_mean(totals),
        stderr_total_reward=_stderr(totals),
        regret_mean=np.array([_fsum_mean(regret[:, k]) for k in range(len(steps))]),
        regret_stderr=np.array([_stderr(regret[:, k]) for k in range(len(steps))]),
        mean_play_counts=np.array([_fsum_mean(plays[:, i]) for i in range(n)]),
        learnt_probability=learnt,
        explored=explored,
    )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> AggregateResult:
    """Run all repetitions and aggregate.

    With ``threads > 1`` the repetitions are split into contiguous blocks
    simulated concurrently; the result is identical to a single block.
    """
    reps = list(range(config.repetitions))
    threads = max(1, min(int(threads), len(reps)))
    if threads == 1:
        traces = simulate(config, reps)
    else:
        blocks = [list(b) for b in np.array_split(reps, threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda blk: simulate(config, blk), blocks))
        traces = [tr for part in parts for tr in part]
    return aggregate(config, traces)
