import math
import warnings

import numpy as np
import pytest

from gevbandit.choice_models import make_mnl, make_nested_logit, perspective_gradient
from gevbandit.environments import random_adversarial
from gevbandit.errors import InvalidParameterError, RewardRangeError
from gevbandit.experts import (
    experts_init, experts_regret, experts_step, optimal_eta, optimized_regret_bound, run_experts,
    theoretical_regret_bound,
)


def softmax(v):
    e = np.exp(np.asarray(v) - np.max(v))
    return e / e.sum()


def test_first_decision_uniform_for_mnl():
    state = experts_init(make_mnl(4, 0.25), 1.0)
    np.testing.assert_allclose(state.decision(), [0.25] * 4, rtol=1e-15)
    assert state.cumulative_gain == 0 and state.t == 0


def test_first_decision_nested_logit():
    state = experts_init(make_nested_logit([([0, 1], 0.5), ([2], 1.0)]), 1.0)
    np.testing.assert_allclose(state.decision(), [0.29289, 0.29289, 0.41421], atol=5e-6)


def test_two_step_run_against_softmax():
    state = experts_init(make_mnl(2, 1.0), 1.0)
    x1 = experts_step(state, [1.0, 0.0])
    np.testing.assert_allclose(x1, [0.5, 0.5])
    assert state.cumulative_gain == pytest.approx(0.5)
    np.testing.assert_array_equal(state.U, [1.0, 0.0])
    x2 = experts_step(state, [1.0, 0.0])
    np.testing.assert_allclose(x2, softmax([1.0, 0.0]), rtol=1e-14)
    gain = 0.5 + softmax([1.0, 0.0])[0]
    assert state.cumulative_gain == pytest.approx(gain, rel=1e-14)
    assert experts_regret([[1, 0], [1, 0]], state.cumulative_gain) == pytest.approx(2 - gain, rel=1e-14)
    assert 2 - gain == pytest.approx(0.7689, abs=1e-4)


def test_zero_and_constant_rewards_leave_decision_unchanged():
    model = make_nested_logit([([0, 2], 0.3), ([1, 3], 0.6)])
    state = experts_init(model, 1.0)
    experts_step(state, [0.3, -0.2, 0.1, 0.0])
    before = state.decision()
    gain = state.cumulative_gain
    experts_step(state, np.zeros(4))
    assert state.cumulative_gain == gain
    np.testing.assert_array_equal(state.decision(), before)
    experts_step(state, np.full(4, 0.7))
    np.testing.assert_allclose(state.decision(), before, atol=1e-15)


def test_regret_examples():
    assert experts_regret([[0.3, 0.7]], 0.5) == pytest.approx(0.2)
    assert experts_regret([[1, 0], [0, 1], [1, 0]], 2.0) == 0.0


def test_decision_depends_on_ratio_only():
    model = make_nested_logit([([0, 2], 0.05), ([1, 3], 0.1)])
    U = np.array([3.0, -1.0, 2.5, 0.2])
    np.testing.assert_allclose(perspective_gradient(model, 2 * U, 2.0), perspective_gradient(model, U, 1.0),
                               atol=1e-12)


def test_reward_bound_violation():
    state = experts_init(make_mnl(2, 1.0), 1.0)
    with pytest.warns(RuntimeWarning):
        experts_step(state, [2.0, 0.0])
    strict = experts_init(make_mnl(2, 1.0), 1.0, on_violation="raise")
    with pytest.raises(RewardRangeError):
        experts_step(strict, [2.0, 0.0])


def test_init_validation():
    with pytest.raises(InvalidParameterError):
        experts_init(make_mnl(2, 1.0), 0.0)


def test_bound_formulas():
    model = make_mnl(4, 1.0)
    assert theoretical_regret_bound(model, 1.0, 1.0, 100) == pytest.approx(math.log(4) + 100, rel=1e-14)
    assert optimized_regret_bound(model, 1.0, 100) == pytest.approx(2 * math.sqrt(math.log(4) * 100), rel=1e-14)
    assert optimized_regret_bound(model, 1.0, 100) == pytest.approx(23.55, abs=5e-3)
    assert theoretical_regret_bound(model, 1.0, 1.0, 0) == pytest.approx(math.log(4))
    eta = optimal_eta(model, 1.0, 100)
    assert theoretical_regret_bound(model, eta, 1.0, 100) == pytest.approx(optimized_regret_bound(model, 1.0, 100))


def test_decisions_interior_and_sublinear_regret():
    rng = np.random.default_rng(2)
    model = make_mnl(4, 1.0)
    env = random_adversarial(4, 4000, rng)
    eta = optimal_eta(model, 1.0, 4000)
    xs, gains = run_experts(model, eta, env.rewards)
    # every entry positive means the decision is interior; the largest
    # entry can still round to 1.0 when the others are below 1e-16
    assert np.all(xs > 0)
    np.testing.assert_allclose(xs.sum(axis=1), 1.0, atol=1e-12)
    r4000 = experts_regret(env.rewards, math.fsum(gains))
    xs1, g1 = run_experts(model, eta, env.rewards[:1000])
    r1000 = experts_regret(env.rewards[:1000], math.fsum(g1))
    assert r4000 / 4000 < r1000 / 1000
    assert r4000 <= theoretical_regret_bound(model, eta, 1.0, 4000)


def test_run_experts_matches_stepping():
    model = make_nested_logit([([0, 2], 0.3), ([1, 3], 0.6)])
    rewards = random_adversarial(4, 30, np.random.default_rng(4)).rewards
    xs, gains = run_experts(model, 0.7, rewards)
    state = experts_init(model, 0.7)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for t, u in enumerate(rewards):
            np.testing.assert_array_equal(experts_step(state, u), xs[t])
    assert state.cumulative_gain == pytest.approx(math.fsum(gains), rel=1e-13)
