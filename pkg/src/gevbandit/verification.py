"""Numerical certificates for the constants attached to GNL models.

Every ``check_*`` function evaluates an inequality at a set of sample
points and returns a :class:`CheckResult` with the worst margin (right
side minus left side; negative means violated beyond tolerance). All
constants can be overridden so that deliberately wrong values serve as
negative controls.

Derivatives are central finite differences of the surplus along one
coordinate, evaluated through :func:`surplus_increment` so that roundoff
does not swamp the second difference.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .choice_models import (
    GnlModel,
    Nest,
    choice_probabilities,
    perspective_gradient,
    perspective_surplus,
    surplus,
    surplus_increment,
)

H_FIRST = 1e-5
H_SECOND = 1e-4
TOL_FIRST = 1e-6
TOL_SECOND = 1e-8


def smoothness_constant(model: GnlModel, eta: float = 1.0) -> float:
    """``(2 / min_l mu_l - 1 / mu) / eta``; ``1 / (mu * eta)`` for MNL."""
    return (2.0 / model.min_nest_mu - 1.0 / model.mu) / eta


def diff_consistency_constant(model: GnlModel) -> float:
    """``1 / min_l mu_l`` (divide by ``eta`` for the perspective)."""
    return 1.0 / model.min_nest_mu


def proposition1_constant(model: GnlModel) -> float:
    """``M = (1 / min_l mu_l - 1) / mu``."""
    return (1.0 / model.min_nest_mu - 1.0) / model.mu


# -- finite differences -------------------------------------------------------

def fd_gradient(model: GnlModel, u, h: float = H_FIRST) -> np.ndarray:
    """Central differences of the surplus, one coordinate at a time.

    Plain differences of ``surplus``; kept independent of the increment
    machinery so it can serve as an oracle for it.
    """
    u = np.asarray(u, dtype=float)
    g = np.empty_like(u)
    for i in range(model.n):
        e = np.zeros(model.n)
        e[i] = h
        g[..., i] = (surplus(model, u + e) - surplus(model, u - e)) / (2 * h)
    return g


def fd_first(model: GnlModel, u, i: int, h: float = H_FIRST) -> np.ndarray:
    return (surplus_increment(model, u, i, h) - surplus_increment(model, u, i, -h)) / (2 * h)


def fd_second(model: GnlModel, u, i: int, h: float = H_SECOND) -> np.ndarray:
    return (surplus_increment(model, u, i, h) + surplus_increment(model, u, i, -h)) / h**2


def _log_coordinate_derivs(model: GnlModel, u, i: int, h: float):
    """First and second derivatives of ``G(exp(u + t e_i)) / G(exp(u))`` at t = 0."""
    up = np.expm1(surplus_increment(model, u, i, h) / model.mu)
    dn = np.expm1(surplus_increment(model, u, i, -h) / model.mu)
    return (up - dn) / (2 * h), (up + dn) / h**2


def scaled_partials(model: GnlModel, x, h: float = H_SECOND):
    """``x_i dG/dx_i / G`` and ``x_i**2 d2G/dx_i**2 / G`` for every ``i``.

    Differences are taken in ``log x`` with step ``h * min_l mu_l`` and one
    Richardson step; the curvature of ``G`` scales with ``1 / min_l mu_l``.
    """
    x = np.asarray(x, dtype=float)
    u = np.log(x)
    step = h * model.min_nest_mu
    first = np.empty_like(u)
    second = np.empty_like(u)
    for i in range(model.n):
        d1h, d2h = _log_coordinate_derivs(model, u, i, step)
        d1q, d2q = _log_coordinate_derivs(model, u, i, step / 2)
        d1 = (4 * d1q - d1h) / 3
        d2 = (4 * d2q - d2h) / 3
        first[..., i] = d1
        # x^2 G'' = (d^2/dt^2 - d/dt) G  with t = log x
        second[..., i] = d2 - d1
    return first, second


# -- reports ------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    model: str
    samples: str
    worst_margin: float
    passed: bool | None
    detail: str = ""

    @property
    def status(self) -> str:
        return {True: "pass", False: "fail", None: "n/a"}[self.passed]


@dataclass
class VerificationReport:
    entries: list[CheckResult] = field(default_factory=list)

    def add(self, entry: CheckResult) -> CheckResult:
        self.entries.append(entry)
        return entry

    @property
    def passed(self) -> bool:
        return all(e.passed is not False for e in self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "model", "samples", "worst_margin", "status", "detail"])
        for e in self.entries:
            w.writerow([e.name, e.model, e.samples, f"{e.worst_margin:.17g}", e.status, e.detail])
        return buf.getvalue()

    def summary(self) -> str:
        width = max((len(e.name) for e in self.entries), default=0)
        lines = [f"{e.status.upper():4}  {e.name:<{width}}  margin={e.worst_margin:.3e}  {e.samples}"
                 for e in self.entries]
        n_fail = sum(e.passed is False for e in self.entries)
        lines.append(f"{len(self.entries)} checks, {n_fail} failed")
        return "\n".join(lines)


def describe(model: GnlModel) -> str:
    nests = ";".join(
        "{" + ",".join(f"{i + 1}" if s == 1 else f"{i + 1}:{s:.3g}" for i, s in zip(n.arms, n.shares))
        + f"}}@{n.mu:.6g}"
        for n in model.nests
    )
    return f"mu={model.mu:.6g} nests={nests}"


def _margin_result(name, model, samples, margins, detail=""):
    worst = float(np.min(margins)) if np.size(margins) else math.inf
    return CheckResult(name, describe(model), samples, worst, bool(worst >= 0), detail)


# -- checks ---------------------------------------------------------------------

def bregman_divergence(model: GnlModel, eta: float, U, u) -> np.ndarray:
    """``D(U + u, U)`` for the perspective ``eta * E(. / eta)``."""
    U = np.asarray(U, dtype=float)
    u = np.asarray(u, dtype=float)
    grad = perspective_gradient(model, U, eta)
    return (perspective_surplus(model, U + u, eta) - perspective_surplus(model, U, eta)
            - np.sum(grad * u, axis=-1))


def check_strong_smoothness(model: GnlModel, eta: float, U, u, L: float | None = None,
                            tol: float = 1e-10) -> CheckResult:
    """``D(U + u, U) <= L / 2 * ||u||_inf**2`` at every sample pair."""
    if L is None:
        L = smoothness_constant(model, eta)
    U = np.atleast_2d(U)
    u = np.atleast_2d(u)
    div = bregman_divergence(model, eta, U, u)
    margins = 0.5 * L * np.max(np.abs(u), axis=-1) ** 2 - div + tol
    return _margin_result("strong_smoothness", model, f"{len(U)} pairs, eta={eta:g}, L={L:.6g}", margins)


def check_diff_consistency(model: GnlModel, U, C: float | None = None,
                           tol: float = TOL_SECOND, h: float = H_SECOND) -> CheckResult:
    """``d2E/dU_i2 <= C dE/dU_i + tol`` on points of the negative orthant."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if np.any(U >= 0):
        raise ValueError("differential consistency is checked on the open negative orthant")
    if C is None:
        C = diff_consistency_constant(model)
    p = choice_probabilities(model, U)
    margins = np.stack(
        [C * p[:, i] + tol - fd_second(model, U, i, h) for i in range(model.n)], axis=-1
    )
    return _margin_result("diff_consistency", model, f"{len(U)} points x {model.n} coords, C={C:.6g}", margins)


def check_proposition1(model: GnlModel, x, M: float | None = None, tol: float = TOL_SECOND) -> CheckResult:
    """``sum_i d2G/dx_i2 * x_i**2 <= M * G(x)`` on positive points.

    Both sides are divided by ``G(x)``; ``tol`` is relative to ``max(1, M)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise ValueError("condition is checked on the positive orthant")
    if M is None:
        M = proposition1_constant(model)
    _, second = scaled_partials(model, x)
    margins = M + tol * max(1.0, abs(M)) - second.sum(axis=-1)
    return _margin_result("proposition1", model, f"{len(x)} points, M={M:.6g}", margins)


def check_alpha_bounds(model: GnlModel, tol: float = 1e-10) -> CheckResult:
    """Surplus at zero against its closed form (MNL) or bracket (NL)."""
    n = model.n
    e0 = float(surplus(model, np.zeros(n)))
    log_n = math.log(n)
    if model.is_mnl:
        target = model.mu * log_n
        return CheckResult("alpha_bounds", describe(model), "u=0",
                           tol - abs(e0 - target), abs(e0 - target) <= tol,
                           f"E(0)={e0:.17g} expected {target:.17g}")
    if model.is_partition and model.mu == 1.0:
        lo, hi = model.min_nest_mu * log_n, log_n
        margin = min(e0 - lo, hi - e0) + tol
        return CheckResult("alpha_bounds", describe(model), "u=0", margin, margin >= 0,
                           f"E(0)={e0:.17g} in [{lo:.17g}, {hi:.17g}]")
    return CheckResult("alpha_bounds", describe(model), "u=0", math.nan, None,
                       "model is neither MNL nor a partition nested logit")


def divergence_terms(model: GnlModel, eta: float, U, loss: float = -1.0) -> np.ndarray:
    """``D(U + loss / x_i * e_i, U)`` for each arm ``i`` (rows of ``U`` broadcast)."""
    U = np.asarray(U, dtype=float)
    x = perspective_gradient(model, U, eta)
    out = np.empty_like(x)
    for i in range(model.n):
        s = loss / x[..., i]
        out[..., i] = eta * surplus_increment(model, U / eta, i, s / eta) - x[..., i] * s
    return out


def check_divergence_bound(model: GnlModel, eta: float, U, rng: np.random.Generator,
                           draws: int = 100_000, C: float | None = None, loss: float = -1.0,
                           n_sigma: float = 3.0) -> CheckResult:
    """Monte Carlo conditional Bregman divergence of one bandit update.

    At each point the arm is drawn from the sampling distribution, the
    estimate ``loss / x_i`` is applied, and the average divergence must
    stay below ``C * n / 2`` plus ``n_sigma`` standard errors.
    """
    from .bandit import sample_arm

    U = np.atleast_2d(np.asarray(U, dtype=float))
    if C is None:
        C = diff_consistency_constant(model) / eta
    bound = C * model.n / 2
    terms = divergence_terms(model, eta, U, loss)
    probs = perspective_gradient(model, U, eta)
    margins = []
    exact = []
    for row, (d, x) in enumerate(zip(terms, probs)):
        arms = sample_arm(x, rng.random(draws))
        vals = d[arms]
        mean = math.fsum(vals) / draws
        se = float(np.std(vals, ddof=1)) / math.sqrt(draws)
        margins.append(bound + n_sigma * se - mean)
        exact.append(float(x @ d))
    return _margin_result(
        "divergence_bound", model,
        f"{len(U)} points x {draws} draws, eta={eta:g}, bound={bound:.6g}",
        np.array(margins), f"max exact expectation={max(exact):.6g}",
    )


# -- samplers -------------------------------------------------------------------

def random_gnl_model(rng: np.random.Generator, max_n: int = 6, max_nests: int = 3,
                     ratio_range=(0.05, 1.0), mu_range=(0.5, 2.0)) -> GnlModel:
    """Random GNL model with overlapping nests and Dirichlet shares."""
    n = int(rng.integers(1, max_n + 1))
    n_nests = int(rng.integers(1, max_nests + 1))
    mu = float(rng.uniform(*mu_range))
    table: list[dict[int, float]] = [dict() for _ in range(n_nests)]
    for i in range(n):
        k = int(rng.integers(1, n_nests + 1))
        members = rng.choice(n_nests, size=k, replace=False)
        shares = rng.dirichlet(np.ones(k))
        # clamp the last share so each row sums to one in floating point
        shares[-1] = 1.0 - math.fsum(shares[:-1])
        if shares[-1] <= 0:
            shares = np.full(k, 1.0 / k)
        for l, s in zip(members, shares):
            table[int(l)][i] = float(s)
    nests = tuple(
        Nest.from_shares(mu * float(rng.uniform(*ratio_range)), t) for t in table if t
    )
    return GnlModel(mu, nests, n)


def negative_orthant(rng: np.random.Generator, size, lo: float = 1e-3, hi: float = 50.0) -> np.ndarray:
    """Points with coordinates ``-r``, ``r`` log-uniform in ``[lo, hi]``."""
    return -np.exp(rng.uniform(math.log(lo), math.log(hi), size=size))


# -- suite ------------------------------------------------------------------------

def run_verification(model: GnlModel, eta: float = 1.0, seed: int = 0,
                     points: int = 100, smooth_pairs: int = 1000,
                     divergence_points: int = 20, draws: int = 100_000) -> VerificationReport:
    """All checks for one model with the published constants."""
    rng = np.random.default_rng(seed)
    n = model.n
    report = VerificationReport()
    report.add(check_alpha_bounds(model))
    U = rng.uniform(-5, 5, size=(smooth_pairs, n))
    u = rng.uniform(-1, 1, size=(smooth_pairs, n))
    report.add(check_strong_smoothness(model, eta, U, u))
    report.add(check_diff_consistency(model, negative_orthant(rng, (points, n))))
    report.add(check_proposition1(model, np.exp(rng.uniform(-3, 3, size=(points, n)))))
    report.add(check_divergence_bound(model, eta, rng.uniform(-50, 0, size=(divergence_points, n)),
                                      rng, draws=draws))
    return report

