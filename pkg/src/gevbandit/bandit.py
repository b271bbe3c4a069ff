"""GEV multiarmed bandit learner (a generalization of Exp3).

Each round the learner computes ``x_t = grad E(V / eta)``, draws one arm by
inverse CDF, observes that arm's reward and updates its state.

``V`` depends on the estimator:

``"importance-weighted"``
    ``V`` is the cumulative importance-weighted estimate ``U_hat``, where
    each round adds ``reward / x_t[arm]`` at the played arm. With
    ``mode="loss"`` and rewards in ``[-1, 0]`` this is the setting the
    regret bound covers.
``"sample-mean"``
    ``V`` is the per-arm mean of observed rewards (0 for unplayed arms).
    This is the variant that reproduces the published Bernoulli
    experiments; ``U_hat`` is still tracked.

With ``mode="reward"`` rewards must lie in ``[0, 1]`` and are fed to the
update as observed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .choice_models import GnlModel, perspective_gradient, surplus
from .errors import InvalidParameterError, RewardRangeError

MODES = ("loss", "reward")
ESTIMATORS = ("importance-weighted", "sample-mean")


@dataclass(frozen=True)
class ArmOutcome:
    arm: int
    observed: float
    sampling_probs: np.ndarray


@dataclass
class BanditState:
    model: GnlModel
    eta: float
    mode: str = "loss"
    estimator: str = "importance-weighted"
    U_hat: np.ndarray = field(default=None)
    reward_sums: np.ndarray = field(default=None)
    plays: np.ndarray = field(default=None)
    t: int = 0

    def utilities(self) -> np.ndarray:
        if self.estimator == "sample-mean":
            return self.reward_sums / np.maximum(self.plays, 1)
        return self.U_hat

    def sampling_distribution(self) -> np.ndarray:
        return perspective_gradient(self.model, self.utilities(), self.eta)


def bandit_init(model: GnlModel, eta: float, mode: str = "loss",
                estimator: str = "importance-weighted") -> BanditState:
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    if mode not in MODES:
        raise InvalidParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if estimator not in ESTIMATORS:
        raise InvalidParameterError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
    n = model.n
    return BanditState(model, float(eta), mode, estimator,
                       np.zeros(n), np.zeros(n), np.zeros(n, dtype=np.int64))


def sample_arm(probs, variate):
    """Inverse-CDF draw: first arm whose cumulative probability exceeds ``variate``.

    Works row-wise on a batch of distributions. A variate beyond the last
    cumulative sum (possible only through rounding) maps to the last arm.
    """
    probs = np.asarray(probs)
    cdf = np.cumsum(probs, axis=-1)
    v = np.asarray(variate)[..., None]
    arm = np.sum(cdf <= v, axis=-1)
    return np.minimum(arm, probs.shape[-1] - 1)


def bandit_sample(state: BanditState, rng) -> tuple[int, np.ndarray]:
    """Draw an arm with one uniform variate from ``rng``."""
    probs = state.sampling_distribution()
    return int(sample_arm(probs, rng.random())), probs


def bandit_estimate(outcome: ArmOutcome, n: int) -> np.ndarray:
    """One-hot importance-weighted estimate ``observed / p[arm] * e_arm``."""
    p = outcome.sampling_probs[outcome.arm]
    if not p > 0:
        raise AssertionError("sampled arm has zero probability")
    u_hat = np.zeros(n)
    u_hat[outcome.arm] = outcome.observed / p
    return u_hat


def check_reward(mode: str, reward) -> None:
    lo, hi = (-1.0, 0.0) if mode == "loss" else (0.0, 1.0)
    r = np.asarray(reward)
    if np.any((r < lo) | (r > hi)) or not np.all(np.isfinite(r)):
        raise RewardRangeError(f"{mode} mode needs rewards in [{lo}, {hi}], got {reward}")


def bandit_step(state: BanditState, outcome: ArmOutcome) -> BanditState:
    """Fold the observed reward of the sampled arm into the state."""
    check_reward(state.mode, outcome.observed)
    state.U_hat = state.U_hat + bandit_estimate(outcome, state.model.n)
    state.reward_sums[outcome.arm] += outcome.observed
    state.plays[outcome.arm] += 1
    state.t += 1
    return state


def expected_regret_bound(model: GnlModel, eta: float, n: int, horizon: int) -> float:
    """``eta * E(0) + n * T / (min_l mu_l * eta)``."""
    e0 = float(surplus(model, np.zeros(model.n)))
    return eta * e0 + n * horizon / (model.min_nest_mu * eta)
