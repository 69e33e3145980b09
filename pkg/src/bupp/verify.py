"""Numerical verification of the inequalities behind the learners.

Each check builds instances (randomized from a seed or pinned), computes
both sides of its inequality with exact rationals wherever the statement
is exact, and reports the worst observed slack.  A report with passed
False means a genuine counterexample to the coded bound, not a flaky
tolerance: float enters only through irrational bound values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import (
    ONE,
    ZERO,
    DiscreteDist,
    DistributionError,
    ProductDist,
    as_fraction,
    discretize,
    iid_product,
    make_discrete,
    point_mass,
    uniform_lattice,
)
from .instances import (
    equal_revenue_dist,
    equal_revenue_grid,
    query_hard_instance,
    random_instance,
    random_prices,
    sample_hard_instance,
)
from .learn import (
    LearnerConfig,
    QueryOracle,
    SampleOracle,
    bernstein_gamma,
    check_cdf_bound,
    learn_item_by_queries,
    query_round_bound,
    scale_prices,
)
from .optimize import exante_optimal
from .revenue import exante_rev, rev


@dataclass(frozen=True)
class VerificationReport:
    name: str
    passed: bool
    cases: int
    failures: int
    worst_margin: float  # smallest slack seen; >= 0 means the bound held
    bound: float
    details: dict

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures,
            "worst_margin": self.worst_margin,
            "bound": self.bound,
            "details": self.details,
        }


def _report(name, cases, failures, worst, bound, **details) -> VerificationReport:
    return VerificationReport(
        name, failures == 0, cases, failures, float(worst), float(bound), details
    )


def verify_nisan(
    trials: int = 100,
    n_max: int = 3,
    eps: Fraction = Fraction(1, 8),
    prices_per_instance: int = 50,
    seed: int = 0,
) -> VerificationReport:
    """Rounding values down to the eps^2 grid costs at most eps in revenue
    after scaling all prices by (1 - eps).  Exact comparison."""
    eps = as_fraction(eps)
    lattice = (eps * eps).denominator
    cases = failures = 0
    worst = None
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        n = int(rng.integers(1, n_max + 1))
        dist = random_instance(rng, n, lattice=lattice, max_support=4)
        rounded_pd = ProductDist(tuple(discretize(d, eps) for d in dist.items))
        for _ in range(prices_per_instance):
            prices = random_prices(rng, n, lattice)
            margin = (
                rev(rounded_pd, scale_prices(prices, eps))
                - rev(dist, prices)
                + eps
            )
            cases += 1
            if margin < 0:
                failures += 1
            if worst is None or margin < worst:
                worst = margin
    return _report(
        "nisan", cases, failures, worst, eps, trials=trials, eps=str(eps)
    )


def _dominated_within(
    d: DiscreteDist, gamma: float, rng: np.random.Generator
) -> DiscreteDist:
    """A distribution dominating d with CDF gap in [0, sqrt((1-F)gamma)+gamma]."""
    points = sorted(set(d.support) | {ONE})
    cdf_vals = []
    running = ZERO
    for v in points:
        f = d.cdf(v)
        if v == 1:
            target = ONE
        else:
            allowed = math.sqrt((1.0 - float(f)) * gamma) + gamma
            drop = Fraction(float(rng.random()) * allowed)
            target = max(f - drop, ZERO)
        if target < running:
            target = running
        running = target
        cdf_vals.append(target)
    masses = []
    prev = ZERO
    for f in cdf_vals:
        masses.append(f - prev)
        prev = f
    return make_discrete(points, masses, d.lattice)


def verify_approx_sm(
    pairs: int = 200,
    gamma: float = 1 / 64,
    n: int = 4,
    prices_per_pair: int = 3,
    seed: int = 0,
) -> VerificationReport:
    """Lifting each item within the one-sided CDF envelope costs at most
    7 log(1/gamma) (gamma n + sqrt(log(1/gamma) gamma n)) in revenue."""
    gamma = float(gamma)
    lg = math.log(1 / gamma)
    bound_f = 7 * lg * (gamma * n + math.sqrt(lg * gamma * n))
    bound = Fraction(bound_f)
    cases = failures = 0
    worst = None
    for t in range(pairs):
        rng = np.random.default_rng([seed, t])
        lower = random_instance(rng, n, lattice=16, max_support=5)
        lifted = ProductDist(
            tuple(_dominated_within(d, gamma, rng) for d in lower.items)
        )
        for _ in range(prices_per_pair):
            prices = random_prices(rng, n, 16)
            margin = rev(lifted, prices) - rev(lower, prices) + bound
            cases += 1
            if margin < 0:
                failures += 1
            if worst is None or margin < worst:
                worst = margin
    return _report(
        "approx_sm", cases, failures, worst, bound_f, gamma=gamma, n=n
    )


def verify_mistake_loss(
    n: int = 100,
    eps: Fraction = Fraction(1, 100),
    pair: int = 0,
    seed: int = 0,
) -> VerificationReport:
    """Swapping one hidden pair's prices costs at least eps/(5n).  Exact."""
    eps = as_fraction(eps)
    inst = sample_hard_instance(n, eps, np.random.default_rng([seed]))
    threshold = eps / (5 * n)
    gain = rev(inst.dist, inst.assigned_prices()) - rev(
        inst.dist, inst.pair_swapped_prices(pair)
    )
    margin = gain - threshold
    return _report(
        "mistake_loss",
        1,
        0 if margin >= 0 else 1,
        margin,
        threshold,
        n=n,
        eps=str(eps),
        gain=float(gain),
    )


def verify_query_low_loss(
    n: int = 8,
    eps: Fraction = Fraction(1, 32),
    seed: int = 0,
) -> VerificationReport:
    """Every single-price deviation from the hidden best grid prices loses
    at least eps/(4n) of ex-ante revenue, and the optimizer recovers the
    hidden prices exactly."""
    eps = as_fraction(eps)
    inst = query_hard_instance(n, eps, np.random.default_rng([seed]))
    grid = equal_revenue_grid(eps)
    prices, optimum = exante_optimal(inst.dist, grid)
    threshold = eps / (4 * n)
    cases = failures = 0
    worst = None
    recovered = prices == inst.best_prices()
    if not recovered:
        failures += 1
    for i in range(n):
        for g in grid:
            if g == prices[i]:
                continue
            deviated = prices[:i] + (g,) + prices[i + 1 :]
            margin = optimum - threshold - exante_rev(inst.dist, deviated)
            cases += 1
            if margin < 0:
                failures += 1
            if worst is None or margin < worst:
                worst = margin
    return _report(
        "query_low_loss",
        cases + 1,
        failures,
        worst,
        threshold,
        n=n,
        eps=str(eps),
        recovered=recovered,
    )


def verify_sum_integral(
    trials: int = 200,
    n_max: int = 5,
    seed: int = 0,
) -> VerificationReport:
    """With prices ascending, the total mass of item-utility pairs whose
    joint survival score is below beta never exceeds beta + 1.  Exact."""
    cases = failures = 0
    worst = None
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        n = int(rng.integers(1, n_max + 1))
        dist = random_instance(rng, n, lattice=8, max_support=4)
        prices = tuple(sorted(random_prices(rng, n, 8)))
        beta = Fraction(int(rng.integers(1, 41)), 8)
        mass = ZERO
        for i, d in enumerate(dist.items):
            for v, m in zip(d.support, d.masses):
                if v < prices[i]:
                    continue
                theta = v - prices[i]
                score = ZERO
                for j, e in enumerate(dist.items):
                    x = prices[j] + theta
                    score += 1 - (e.cdf(x) if j <= i else e.cdf_left(x))
                if score < beta:
                    mass += m
        margin = beta + 1 - mass
        cases += 1
        if margin < 0:
            failures += 1
        if worst is None or margin < worst:
            worst = margin
    return _report("sum_integral", cases, failures, worst, 1.0, trials=trials)


def verify_cdf_bound(
    trials: int = 200,
    n: int = 4,
    samples: int = 10**4,
    delta: Fraction = Fraction(1, 10),
    min_rate: float = 0.9,
    seed: int = 0,
) -> VerificationReport:
    """Empirical CDFs stay inside the Bernstein envelope on all items
    simultaneously in at least a (1 - delta) fraction of trials."""
    delta = as_fraction(delta)
    gamma = bernstein_gamma(n, samples, delta)
    dist = random_instance(np.random.default_rng([seed, 0]), n, lattice=8, max_support=4)
    good = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, 1, t])
        oracle = SampleOracle(dist, rng)
        observed = oracle.draw_counts(samples)
        ok = True
        for d, seen in zip(dist.items, observed):
            values = sorted(seen)
            empirical = make_discrete(
                values,
                [Fraction(seen[v], samples) for v in values],
                dist.lattice,
            )
            if not check_cdf_bound(d, empirical, gamma):
                ok = False
                break
        good += ok
    rate = good / trials
    return _report(
        "cdf_bound",
        trials,
        0 if rate >= min_rate else 1,
        rate - min_rate,
        gamma,
        success_rate=rate,
        samples=samples,
    )


# -- query learner audit (shared by the round-bound check and acceptance) --


@dataclass(frozen=True)
class QueryTrialAudit:
    accuracy_ok: bool  # learned CDF within eps(1-F) + eps/n everywhere
    estimates_ok: bool  # every probe within a tenth of that envelope
    rounds: int
    queries: int


def audit_query_learner(
    hidden: DiscreteDist,
    n: int,
    cfg: LearnerConfig,
    trials: int,
    seed: int,
) -> list[QueryTrialAudit]:
    """Run the per-item query learner repeatedly against one hidden shape.

    The hidden item is embedded in an iid product of size n (the learner's
    adaptive margins depend on n).  All comparisons are exact.
    """
    eps = cfg.eps
    step = eps * eps
    grid_count = int(1 / step)
    dist = iid_product(hidden, n)
    audits = []
    for t in range(trials):
        oracle = QueryOracle(dist, np.random.default_rng([seed, t]))
        learned, trace = learn_item_by_queries(oracle, 0, cfg)
        accuracy_ok = True
        for m in range(grid_count + 1):
            v = m * step
            f = hidden.cdf(v)
            if abs(f - learned.cdf(v)) > eps * (1 - f) + eps / n:
                accuracy_ok = False
                break
        estimates_ok = True
        for index, est in trace.probes:
            f = hidden.cdf(index * step)
            if abs(est - f) > (eps * (1 - f) + eps / n) / 10:
                estimates_ok = False
                break
        audits.append(
            QueryTrialAudit(
                accuracy_ok, estimates_ok, trace.rounds, oracle.total_queries
            )
        )
    return audits


def _hidden_shape(shape: str, n: int, eps: Fraction) -> DiscreteDist:
    step = eps * eps
    lattice = step.denominator
    if shape == "point-one":
        return point_mass(1, lattice)
    if shape == "uniform":
        return uniform_lattice(lattice)
    if shape == "equal-revenue":
        base = equal_revenue_dist(n, Fraction(1, 16))
        if lattice % base.lattice:
            raise DistributionError(
                f"equal-revenue lattice {base.lattice} incompatible with eps {eps}"
            )
        return make_discrete(base.support, base.masses, lattice)
    raise DistributionError(f"unknown hidden shape {shape!r}")


def verify_round_bound(
    trials: int = 50,
    n: int = 4,
    eps: Fraction = Fraction(1, 8),
    delta: Fraction = Fraction(1, 10),
    c: float | None = None,
    shape: str = "equal-revenue",
    seed: int = 0,
) -> VerificationReport:
    """Among trials where every estimate landed inside its tenth-envelope,
    the key-threshold count respects the closed-form round bound."""
    eps = as_fraction(eps)
    cfg = LearnerConfig(eps, as_fraction(delta), c=c)
    hidden = _hidden_shape(shape, n, eps)
    audits = audit_query_learner(hidden, n, cfg, trials, seed)
    bound = query_round_bound(n, eps)
    eligible = [a for a in audits if a.estimates_ok]
    failures = sum(a.rounds > bound for a in eligible)
    worst = min((bound - a.rounds for a in eligible), default=bound)
    return _report(
        "round_bound",
        len(eligible),
        failures,
        worst,
        bound,
        trials=trials,
        eligible=len(eligible),
        shape=shape,
    )


VERIFIERS = {
    "nisan": verify_nisan,
    "approx_sm": verify_approx_sm,
    "mistake_loss": verify_mistake_loss,
    "query_low_loss": verify_query_low_loss,
    "sum_integral": verify_sum_integral,
    "cdf_bound": verify_cdf_bound,
    "round_bound": verify_round_bound,
}


def verify_lemma(name: str, **params) -> VerificationReport:
    if name not in VERIFIERS:
        raise KeyError(
            f"unknown lemma {name!r}; choose from {sorted(VERIFIERS)}"
        )
    return VERIFIERS[name](**params)
