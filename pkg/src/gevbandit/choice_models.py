"""Generalized nested logit (GNL) choice models.

A GNL model over ``n`` alternatives is given by a top-level scale ``mu``
and a list of nests, each with its own scale ``mu_l`` and allocation
shares ``sigma_il``. Its generating function is

    G(x) = sum_l ( sum_i (sigma_il * x_i) ** (1 / mu_l) ) ** (mu_l / mu)

with surplus ``E(u) = mu * log G(exp(u))``. The gradient of the surplus
is the vector of choice probabilities, which is what every learner in
this package samples from.

All evaluation routines work in the log domain and broadcast over leading
axes, so ``u`` may be a single utility vector of shape ``(n,)`` or a batch
of shape ``(..., n)``.

Arms are indexed from 0 in the API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidParameterError, InvalidPartitionError

# smallest positive normal double; choice probabilities never go below it
PROB_FLOOR = np.finfo(float).tiny

_SHARE_TOL = 1e-12
# beyond this exponent the log1p/expm1 route loses to a plain log-sum-exp
_EXPM1_SWITCH = 30.0


def _logsumexp(a, axis=-1):
    """log(sum(exp(a))) along ``axis``; rows that are all -inf give -inf."""
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


@dataclass(frozen=True)
class Nest:
    """One nest: its scale and the (sparse) shares of its member arms."""

    mu: float
    arms: tuple[int, ...]
    shares: tuple[float, ...]

    @classmethod
    def from_shares(cls, mu: float, shares: Mapping[int, float]) -> "Nest":
        items = sorted((int(i), float(s)) for i, s in shares.items() if s != 0)
        return cls(float(mu), tuple(i for i, _ in items), tuple(s for _, s in items))


@dataclass(frozen=True)
class GnlModel:
    """Immutable GNL model, validated at construction.

    Parameters
    ----------
    mu : float
        Top-level scale, ``mu > 0``.
    nests : sequence of Nest
        Every nest scale must satisfy ``0 < mu_l <= mu``. Shares of each
        arm must sum to one over the nests.
    n : int
        Number of arms.
    """

    mu: float
    nests: tuple[Nest, ...]
    n: int
    # per-nest (arm index array, log shares) used by the evaluation code
    _index: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)
    _log_shares: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)
    _nest_mu: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mu, n = float(self.mu), int(self.n)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "nests", tuple(self.nests))
        if not np.isfinite(mu) or mu <= 0:
            raise InvalidParameterError(f"top-level scale mu must be positive, got {mu}")
        if n < 1:
            raise InvalidParameterError(f"need at least one arm, got n={n}")
        if not self.nests:
            raise InvalidParameterError("model needs at least one nest")

        totals = np.zeros(n)
        for k, nest in enumerate(self.nests):
            if not (0 < nest.mu <= mu):
                raise InvalidParameterError(
                    f"nest {k}: scale must satisfy 0 < mu_l <= mu={mu}, got {nest.mu}"
                )
            if not nest.arms:
                raise InvalidParameterError(f"nest {k} is empty")
            if len(nest.arms) != len(nest.shares) or len(set(nest.arms)) != len(nest.arms):
                raise InvalidParameterError(f"nest {k}: malformed share table")
            for i, s in zip(nest.arms, nest.shares):
                if not 0 <= i < n:
                    raise InvalidParameterError(f"nest {k}: arm {i} out of range 0..{n - 1}")
                if not s > 0:
                    raise InvalidParameterError(f"nest {k}: share of arm {i} must be positive")
                totals[i] += s
        bad = np.flatnonzero(np.abs(totals - 1.0) > _SHARE_TOL)
        if bad.size:
            raise InvalidParameterError(
                f"shares of arm {int(bad[0])} sum to {totals[bad[0]]!r}, expected 1"
            )

        object.__setattr__(
            self, "_index", tuple(np.asarray(nest.arms, dtype=np.intp) for nest in self.nests)
        )
        object.__setattr__(
            self, "_log_shares", tuple(np.log(np.asarray(nest.shares)) for nest in self.nests)
        )
        object.__setattr__(self, "_nest_mu", np.array([nest.mu for nest in self.nests]))

    @property
    def min_nest_mu(self) -> float:
        return float(self._nest_mu.min())

    @property
    def is_mnl(self) -> bool:
        """Single nest holding every arm with unit share and ``mu_l == mu``."""
        if len(self.nests) != 1:
            return False
        nest = self.nests[0]
        return nest.mu == self.mu and len(nest.arms) == self.n and all(s == 1 for s in nest.shares)

    @property
    def is_partition(self) -> bool:
        """All shares are 0/1, i.e. the nests partition the arms."""
        return all(s == 1 for nest in self.nests for s in nest.shares)


def make_mnl(n: int, mu: float) -> GnlModel:
    """Multinomial logit: one nest, unit shares, ``mu_l = mu``."""
    if n < 1:
        raise InvalidParameterError(f"need at least one arm, got n={n}")
    if not mu > 0:
        raise InvalidParameterError(f"mu must be positive, got {mu}")
    return GnlModel(mu, (Nest(float(mu), tuple(range(n)), (1.0,) * n),), n)


def make_nested_logit(nests: Sequence[tuple[Sequence[int], float]], n: int | None = None) -> GnlModel:
    """Nested logit with ``mu = 1`` from a partition of the arms.

    ``nests`` is a sequence of ``(arms, mu_l)`` pairs with 0-based arm
    indices. ``n`` defaults to the number of arms covered.
    """
    seen: dict[int, int] = {}
    for k, (arms, _) in enumerate(nests):
        if len(arms) == 0:
            raise InvalidPartitionError(f"nest {k} is empty")
        for i in arms:
            if i in seen:
                raise InvalidPartitionError(f"arm {i} appears in nests {seen[i]} and {k}")
            seen[int(i)] = k
    if n is None:
        n = max(seen) + 1 if seen else 0
    missing = sorted(set(range(n)) - set(seen))
    if missing:
        raise InvalidPartitionError(f"arms {missing} are not in any nest")
    extra = sorted(i for i in seen if not 0 <= i < n)
    if extra:
        raise InvalidPartitionError(f"arms {extra} are out of range 0..{n - 1}")
    for k, (_, mu_l) in enumerate(nests):
        if not 0 < mu_l <= 1:
            raise InvalidParameterError(f"nest {k}: nested logit needs 0 < mu_l <= 1, got {mu_l}")
    return GnlModel(
        1.0,
        tuple(Nest(float(mu_l), tuple(sorted(int(i) for i in arms)), (1.0,) * len(arms))
              for arms, mu_l in nests),
        n,
    )


def _nest_logs(model: GnlModel, u):
    """Within-nest log weights ``a_l`` and nest log sums ``log S_l``."""
    a = []
    log_s = []
    for idx, log_sh, mu_l in zip(model._index, model._log_shares, model._nest_mu):
        a_l = (u[..., idx] + log_sh) / mu_l
        a.append(a_l)
        log_s.append(_logsumexp(a_l))
    return a, np.stack(log_s, axis=-1)


def log_generating_value(model: GnlModel, log_x) -> np.ndarray:
    """``log G(exp(log_x))``; entries of ``log_x`` may be ``-inf``."""
    log_x = np.asarray(log_x, dtype=float)
    _, log_s = _nest_logs(model, log_x)
    return _logsumexp(log_s * (model._nest_mu / model.mu))


def generating_value(model: GnlModel, x) -> np.ndarray:
    """The GNL generating function ``G(x)`` for ``x >= 0``, ``x != 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise InvalidParameterError("generating function is defined on the nonnegative orthant")
    if np.any(np.all(x == 0, axis=-1)):
        raise DegenerateInputError("G is not positive at x = 0")
    with np.errstate(divide="ignore"):
        return np.exp(log_generating_value(model, np.log(x)))


def surplus(model: GnlModel, u) -> np.ndarray:
    """Surplus ``E(u) = mu * log G(exp(u))``."""
    return model.mu * log_generating_value(model, u)


def choice_probabilities(model: GnlModel, u) -> np.ndarray:
    """Closed-form GNL choice probabilities, i.e. the gradient of the surplus.

    Each arm's probability is the sum over its nests of
    (probability of the nest) x (probability of the arm within the nest).
    Entries are floored at ``PROB_FLOOR`` so that they stay strictly
    positive even when the exact value underflows.
    """
    u = np.asarray(u, dtype=float)
    # probabilities are translation invariant; centring keeps the
    # log-domain terms of the leading arms small and accurate
    u = u - np.max(u, axis=-1, keepdims=True)
    a, log_s = _nest_logs(model, u)
    b = log_s * (model._nest_mu / model.mu)
    log_w = b - _logsumexp(b)[..., None]
    p = np.zeros_like(u)
    for k, (idx, a_l) in enumerate(zip(model._index, a)):
        p[..., idx] += np.exp(log_w[..., k, None] + a_l - log_s[..., k, None])
    p = np.maximum(p, PROB_FLOOR)
    return p / np.sum(p, axis=-1, keepdims=True)


def perspective_gradient(model: GnlModel, U, eta: float) -> np.ndarray:
    """Gradient of ``eta * E(U / eta)``, which equals ``grad E(U / eta)``."""
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    return choice_probabilities(model, np.asarray(U, dtype=float) / eta)


def perspective_surplus(model: GnlModel, U, eta: float) -> np.ndarray:
    """``eta * E(U / eta)``."""
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    return eta * surplus(model, np.asarray(U, dtype=float) / eta)


def _log1p_expm1_mix(log_q, log_1mq, x):
    """``log(1 + q * (exp(x) - 1))`` for ``0 <= q <= 1``, accurate near x = 0.

    ``q`` enters through ``log q`` and ``log(1 - q)`` so that ``q`` close
    to 1 keeps its complement. The ``log1p`` form is used only while its
    argument stays above -1/2; closer to -1 it is ill-conditioned.
    """
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        arg = np.exp(log_q) * np.expm1(np.minimum(x, _EXPM1_SWITCH))
        near = np.log1p(arg)
        far = np.logaddexp(log_1mq, log_q + x)
    return np.where((x <= _EXPM1_SWITCH) & (arg > -0.5), near, far)


def surplus_increment(model: GnlModel, u, i: int, s) -> np.ndarray:
    """``E(u + s * e_i) - E(u)`` computed without cancellation.

    Moving one coordinate rescales the nest sums by
    ``1 + q_il * (exp(s / mu_l) - 1)``, where ``q_il`` is arm ``i``'s
    within-nest probability; the increment is then assembled with
    ``log1p``/``expm1``, so it keeps full relative accuracy even when it
    is many orders of magnitude below ``E(u)``. ``s`` broadcasts against
    the leading axes of ``u``.
    """
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    a, log_s = _nest_logs(model, u)
    ratio = model._nest_mu / model.mu
    b = log_s * ratio
    w = np.exp(b - _logsumexp(b)[..., None])

    y = []
    for k, (idx, a_l) in enumerate(zip(model._index, a)):
        pos = np.flatnonzero(idx == i)
        if pos.size == 0:
            y.append(np.zeros(np.broadcast_shapes(s.shape, u.shape[:-1])))
            continue
        log_q = a_l[..., pos[0]] - log_s[..., k]
        if a_l.shape[-1] == 1:
            log_1mq = np.full_like(log_q, -np.inf)
        else:
            log_1mq = _logsumexp(np.delete(a_l, pos[0], axis=-1)) - log_s[..., k]
        with np.errstate(over="ignore"):
            x = s / model._nest_mu[k]
        y.append(ratio[k] * _log1p_expm1_mix(log_q, log_1mq, x))
    y = np.stack(np.broadcast_arrays(*y), axis=-1)

    y_max = np.max(y, axis=-1)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        arg = np.sum(w * np.expm1(np.minimum(y, _EXPM1_SWITCH)), axis=-1)
        near = np.log1p(arg)
        far = _logsumexp(np.log(w) + y)
    return model.mu * np.where((y_max <= _EXPM1_SWITCH) & (arg > -0.5), near, far)
