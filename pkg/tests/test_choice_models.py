import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevbandit.choice_models import (
    GnlModel, Nest, choice_probabilities, generating_value, make_mnl, make_nested_logit,
    perspective_gradient, perspective_surplus, surplus, surplus_increment,
)
from gevbandit.errors import DegenerateInputError, InvalidParameterError, InvalidPartitionError
from gevbandit.verification import random_gnl_model


def naive_surplus(model, u):
    """Plain-loop E(u) = mu * log G(exp(u)), written without the library."""
    total = 0.0
    for nest in model.nests:
        inner = sum((s * math.exp(u[i])) ** (1.0 / nest.mu) for i, s in zip(nest.arms, nest.shares))
        total += inner ** (nest.mu / model.mu)
    return model.mu * math.log(total)


def naive_gradient(model, u, h=1e-6):
    g = np.empty(model.n)
    for i in range(model.n):
        up, dn = list(u), list(u)
        up[i] += h
        dn[i] -= h
        g[i] = (naive_surplus(model, up) - naive_surplus(model, dn)) / (2 * h)
    return g


def env1_nl():
    return make_nested_logit([([0, 1], 0.5), ([2], 1.0)])


def test_nested_logit_probabilities_at_zero():
    p = choice_probabilities(env1_nl(), np.zeros(3))
    # two-arm nest: 2**0.5 / (2**0.5 + 1) split evenly
    nest = math.sqrt(2) / (math.sqrt(2) + 1)
    np.testing.assert_allclose(p, [nest / 2, nest / 2, 1 - nest], rtol=0, atol=1e-15)
    np.testing.assert_allclose(p, [0.29289, 0.29289, 0.41421], atol=5e-6)


def test_generating_value_and_surplus_at_zero():
    model = env1_nl()
    assert generating_value(model, np.ones(3)) == pytest.approx(1 + math.sqrt(2), rel=1e-14)
    assert surplus(model, np.zeros(3)) == pytest.approx(math.log(1 + math.sqrt(2)), rel=1e-14)


def test_mnl_is_softmax():
    p = choice_probabilities(make_mnl(2, 1.0), np.array([1.0, 0.0]))
    e = math.exp(1)
    np.testing.assert_allclose(p, [e / (e + 1), 1 / (e + 1)], rtol=1e-14)


def test_mnl_surplus_at_zero_is_mu_log_n():
    for n, mu in [(4, 0.25), (13, 1.0), (3, 2.5)]:
        assert surplus(make_mnl(n, mu), np.zeros(n)) == pytest.approx(mu * math.log(n), rel=1e-14)


def test_gradient_matches_independent_oracle():
    rng = np.random.default_rng(11)
    for _ in range(40):
        model = random_gnl_model(rng)
        for u in rng.uniform(-3, 3, size=(5, model.n)):
            np.testing.assert_allclose(choice_probabilities(model, u), naive_gradient(model, list(u)),
                                       atol=1e-6)


def test_generating_value_zero_is_degenerate():
    with pytest.raises(DegenerateInputError):
        generating_value(make_mnl(3, 1.0), np.zeros(3))


@pytest.mark.parametrize("nests,err", [
    ([([0, 1], 0.5), ([1, 2], 0.5)], InvalidPartitionError),
    ([([0], 0.5), ([2], 0.5)], InvalidPartitionError),
    ([([0, 1], 1.5)], InvalidParameterError),
    ([([0, 1], 0.0)], InvalidParameterError),
])
def test_nested_logit_validation(nests, err):
    with pytest.raises(err):
        make_nested_logit(nests, n=3 if err is InvalidPartitionError and len(nests[0][0]) == 1 else None)


def test_gnl_rejects_nest_scale_above_mu():
    with pytest.raises(InvalidParameterError):
        GnlModel(1.0, (Nest.from_shares(1.5, {0: 1.0, 1: 1.0}),), 2)


def test_gnl_rejects_shares_not_summing_to_one():
    with pytest.raises(InvalidParameterError):
        GnlModel(1.0, (Nest.from_shares(0.5, {0: 0.6, 1: 1.0}),
                       Nest.from_shares(0.5, {0: 0.6})), 2)


def test_stress_large_utilities():
    rng = np.random.default_rng(3)
    models = [make_mnl(4, 0.25), make_nested_logit([([0, 2], 0.05), ([1, 3], 0.1)])]
    for model in models:
        for U in [1e4 + rng.uniform(-1, 1, 4), -1e4 + rng.uniform(-1, 1, 4),
                  rng.uniform(-1e4, 1e4, 4), np.array([1e4, -1e4, 0.0, 5e3])]:
            p = choice_probabilities(model, U)
            assert np.all(np.isfinite(p)) and np.all(p > 0)
            assert abs(math.fsum(p) - 1) <= 1e-12


def test_perspective_is_rescaled_gradient():
    model = env1_nl()
    U = np.array([3.0, -1.0, 0.5])
    np.testing.assert_array_equal(perspective_gradient(model, U, 2.0), choice_probabilities(model, U / 2.0))
    assert perspective_surplus(model, U, 2.0) == pytest.approx(2.0 * surplus(model, U / 2.0))


def test_surplus_increment_matches_difference():
    rng = np.random.default_rng(5)
    for _ in range(30):
        model = random_gnl_model(rng)
        u = rng.uniform(-2, 2, model.n)
        for s in (-5.0, -1e-3, 1e-3, 4.0):
            i = int(rng.integers(model.n))
            v = u.copy()
            v[i] += s
            assert surplus_increment(model, u, i, s) == pytest.approx(
                naive_surplus(model, list(v)) - naive_surplus(model, list(u)), rel=1e-9, abs=1e-12)


def test_broadcast_over_rows():
    model = env1_nl()
    U = np.arange(12.0).reshape(4, 3) / 5
    rows = np.stack([choice_probabilities(model, r) for r in U])
    np.testing.assert_array_equal(choice_probabilities(model, U), rows)


# -- properties -----------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(-5, 5), st.floats(0.1, 10))
def test_surplus_translation_and_homogeneity(seed, c, lam):
    rng = np.random.default_rng(seed)
    model = random_gnl_model(rng)
    u = rng.uniform(-3, 3, model.n)
    # E(u + c) = E(u) + c, so probabilities are translation invariant
    assert surplus(model, u + c) == pytest.approx(surplus(model, u) + c, abs=1e-10)
    np.testing.assert_allclose(choice_probabilities(model, u + c), choice_probabilities(model, u), atol=1e-12)
    # G is homogeneous of degree 1/mu
    x = np.exp(u)
    assert generating_value(model, lam * x) == pytest.approx(lam ** (1 / model.mu) * generating_value(model, x),
                                                               rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_euler_identity(seed):
    rng = np.random.default_rng(seed)
    model = random_gnl_model(rng)
    x = np.exp(rng.uniform(-2, 2, model.n))
    G = generating_value(model, x)
    # x_i dG/dx_i = G * P_i / mu, summed gives G / mu
    h = 1e-6
    partials = []
    for i in range(model.n):
        up, dn = x.copy(), x.copy()
        up[i] *= 1 + h
        dn[i] *= 1 - h
        partials.append((generating_value(model, up) - generating_value(model, dn)) / (2 * h))
    assert math.fsum(partials) == pytest.approx(G / model.mu, rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(-1e4, 1e4))
def test_probabilities_on_simplex(seed, scale):
    rng = np.random.default_rng(seed)
    model = random_gnl_model(rng)
    U = rng.uniform(-1, 1, model.n) * scale
    p = choice_probabilities(model, U)
    assert np.all(p > 0)
    assert abs(math.fsum(p) - 1) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0.05, 3))
def test_single_nest_collapses_to_mnl(seed, mu):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    u = rng.uniform(-3, 3, n)
    one_nest = GnlModel(mu, (Nest.from_shares(mu, {i: 1.0 for i in range(n)}),), n)
    np.testing.assert_allclose(choice_probabilities(one_nest, u), choice_probabilities(make_mnl(n, mu), u),
                               atol=1e-14)
    # nests with mu_l = mu also collapse to MNL at scale mu
    split = make_nested_logit([(list(range(0, n, 2)), 1.0), (list(range(1, n, 2)), 1.0)] if n > 1
                              else [([0], 1.0)])
    np.testing.assert_allclose(choice_probabilities(split, u), choice_probabilities(make_mnl(n, 1.0), u),
                               atol=1e-14)


def test_nested_logit_approaches_mnl_as_scales_approach_one():
    u = np.array([0.2, 0.8, 0.87, 0.15]) * 3
    nl = make_nested_logit([([0, 2], 0.998), ([1, 3], 0.998)])
    np.testing.assert_allclose(choice_probabilities(nl, u), choice_probabilities(make_mnl(4, 1.0), u), atol=5e-3)
