"""Reward environments and the seeded random streams that drive them.

Random streams are numpy ``Philox`` generators keyed by
``SeedSequence(seed, spawn_key=(repetition, substream))``. Philox is
counter based, so a given ``(seed, repetition, substream)`` reproduces the
same variates on every platform. Each repetition owns two substreams: one
for the environment and one for the learner, so swapping the learner never
changes the environment's variates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choice_models import GnlModel, make_nested_logit
from .errors import InvalidParameterError

ENV_STREAM = 0
LEARNER_STREAM = 1


def rng_stream(seed: int, repetition: int, substream: int) -> np.random.Generator:
    """Independent generator for one (repetition, substream) pair."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(repetition), int(substream)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class BernoulliEnv:
    """Stochastic bandit whose arm ``i`` pays 1 with probability ``pis[i]``."""

    pis: tuple[float, ...]
    name: str = "bernoulli"

    def __post_init__(self):
        pis = tuple(float(p) for p in self.pis)
        if not pis:
            raise InvalidParameterError("environment needs at least one arm")
        if any(not 0 <= p <= 1 for p in pis):
            raise InvalidParameterError(f"arm means must lie in [0, 1], got {pis}")
        object.__setattr__(self, "pis", pis)

    @property
    def n(self) -> int:
        return len(self.pis)

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.pis))

    @property
    def best_mean(self) -> float:
        return max(self.pis)


@dataclass(frozen=True)
class AdversarialEnv:
    """Oblivious adversary: a ``T x n`` reward matrix fixed before the run."""

    rewards: np.ndarray
    bound: float = 1.0
    name: str = "adversarial"

    def __post_init__(self):
        r = np.array(self.rewards, dtype=float)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise InvalidParameterError("reward matrix must be T x n with T, n >= 1")
        if not np.all(np.isfinite(r)):
            raise InvalidParameterError("reward matrix has non-finite entries")
        if np.max(np.abs(r)) > self.bound:
            raise InvalidParameterError(f"rewards exceed the bound K={self.bound}")
        r.setflags(write=False)
        object.__setattr__(self, "rewards", r)

    @property
    def n(self) -> int:
        return self.rewards.shape[1]

    @property
    def horizon(self) -> int:
        return self.rewards.shape[0]


def env1() -> BernoulliEnv:
    """Four-armed Bernoulli environment, best arm index 2 (mean 0.87)."""
    return BernoulliEnv((0.2, 0.8, 0.87, 0.15), name="env1")


def env2() -> BernoulliEnv:
    """Thirteen-armed Bernoulli environment, best arm index 11 (mean 0.9)."""
    return BernoulliEnv(
        (0.2, 0.3, 0.87, 0.15, 0.79, 0.12, 0.85, 0.1, 0.83, 0.75, 0.14, 0.9, 0.2),
        name="env2",
    )


def env2_nesting() -> list[tuple[list[int], float]]:
    """Nest specification used with ``env2`` (0-based arms)."""
    return [
        (list(range(0, 6)), 0.16),
        ([6, 7], 0.09),
        ([8, 9, 10], 0.21),
        ([11, 12], 0.12),
    ]


def env2_nested_logit() -> GnlModel:
    return make_nested_logit(env2_nesting(), n=13)


def bernoulli_from_variate(pi: float, variate) -> np.ndarray:
    """Reward 1 iff the uniform variate falls below ``pi``."""
    return (np.asarray(variate) < pi).astype(float)


def draw_reward(env: BernoulliEnv, arm: int, rng: np.random.Generator) -> float:
    """Draw one reward for ``arm`` consuming exactly one uniform variate."""
    if not 0 <= arm < env.n:
        raise IndexError(f"arm {arm} out of range 0..{env.n - 1}")
    return float(rng.random() < env.pis[arm])


def random_adversarial(n: int, horizon: int, rng: np.random.Generator, bound: float = 1.0) -> AdversarialEnv:
    """Bounded reward matrix with a random mean per arm plus uniform noise.

    Arm means are drawn from ``[-bound/2, bound/2]`` and per-step noise
    from the same interval, so every entry lies in ``[-bound, bound]``.
    """
    means = rng.uniform(-bound / 2, bound / 2, size=n)
    noise = rng.uniform(-bound / 2, bound / 2, size=(horizon, n))
    return AdversarialEnv(means + noise, bound=bound)
