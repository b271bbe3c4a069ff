"""Full-information online linear optimization over the simplex.

At each step the learner plays the perspective gradient of the cumulative
reward vector, ``x_t = grad E(U_{t-1} / eta)``, then observes the whole
reward vector ``u_t`` and gains ``<x_t, u_t>``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .choice_models import GnlModel, perspective_gradient, surplus
from .errors import InvalidParameterError, RewardRangeError
from .verification import smoothness_constant


@dataclass
class ExpertsState:
    model: GnlModel
    eta: float
    bound: float = 1.0
    on_violation: str = "warn"
    U: np.ndarray = field(default=None)
    t: int = 0
    cumulative_gain: float = 0.0

    def decision(self) -> np.ndarray:
        """The distribution the learner would play next."""
        return perspective_gradient(self.model, self.U, self.eta)


def experts_init(model: GnlModel, eta: float, bound: float = 1.0, on_violation: str = "warn") -> ExpertsState:
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    if not bound > 0:
        raise InvalidParameterError(f"reward bound must be positive, got {bound}")
    if on_violation not in ("warn", "raise"):
        raise InvalidParameterError(f"on_violation must be 'warn' or 'raise', got {on_violation!r}")
    return ExpertsState(model, float(eta), float(bound), on_violation, np.zeros(model.n))


def experts_step(state: ExpertsState, u) -> np.ndarray:
    """Play one round against reward vector ``u`` and return the decision.

    The decision is computed from ``U_{t-1}`` before ``u`` is added.
    Rewards above the bound only warn unless the state was built with
    ``on_violation="raise"``.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (state.model.n,):
        raise ValueError(f"reward vector must have shape ({state.model.n},), got {u.shape}")
    if np.max(np.abs(u)) > state.bound:
        msg = f"reward {u} exceeds the bound K={state.bound}"
        if state.on_violation == "raise":
            raise RewardRangeError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    x = state.decision()
    state.cumulative_gain += float(x @ u)
    state.U = state.U + u
    state.t += 1
    return x


def run_experts(model: GnlModel, eta: float, rewards) -> tuple[np.ndarray, np.ndarray]:
    """Run the learner over a whole ``T x n`` reward matrix.

    Returns the decisions (``T x n``) and the per-step gains (``T``).
    """
    rewards = np.asarray(rewards, dtype=float)
    U = np.zeros(rewards.shape[1])
    xs = np.empty_like(rewards)
    for t, u in enumerate(rewards):
        xs[t] = perspective_gradient(model, U, eta)
        U = U + u
    return xs, np.einsum("ti,ti->t", xs, rewards)


def experts_regret(reward_history, gain: float) -> float:
    """Best fixed arm's cumulative reward minus the learner's gain."""
    history = np.asarray(reward_history, dtype=float)
    if history.ndim != 2 or history.shape[0] == 0:
        raise ValueError("reward history must be a nonempty T x n array")
    return float(np.max(history.sum(axis=0)) - gain)


def theoretical_regret_bound(model: GnlModel, eta: float, bound: float, horizon: int) -> float:
    """``eta * alpha + L * K**2 * T / eta``.

    ``alpha`` is the surplus at zero and ``L`` the smoothness constant of
    the unscaled surplus.
    """
    alpha = float(surplus(model, np.zeros(model.n)))
    L = smoothness_constant(model, 1.0)
    return eta * alpha + L * bound**2 * horizon / eta


def optimized_regret_bound(model: GnlModel, bound: float, horizon: int) -> float:
    """The bound at its minimizing step size, ``2 K sqrt(alpha L T)``."""
    alpha = float(surplus(model, np.zeros(model.n)))
    L = smoothness_constant(model, 1.0)
    return 2.0 * bound * math.sqrt(alpha * L * horizon)


def optimal_eta(model: GnlModel, bound: float, horizon: int) -> float:
    """Step size minimizing ``theoretical_regret_bound``; needs ``alpha > 0``."""
    alpha = float(surplus(model, np.zeros(model.n)))
    if alpha <= 0:
        raise InvalidParameterError("optimal eta is undefined when the surplus at zero is not positive")
    return bound * math.sqrt(smoothness_constant(model, 1.0) * horizon / alpha)
