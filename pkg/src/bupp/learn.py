"""Learning near-optimal prices from samples or threshold queries.

Two access models to a hidden product distribution: an oracle releasing
full iid value vectors, and an oracle answering one fresh threshold
comparison (is a freshly drawn value >= this price?) per query.  The
sample learner builds per-item empirical distributions and optimizes
those.  The query learner reconstructs each CDF on the eps^2 grid by a
descending sequence of binary searches whose acceptance margin adapts to
the current tail mass, then optimizes the reconstruction and scales all
prices down by (1 - eps).

Batched oracle calls draw one binomial or multinomial with the exact
per-call law, so they are statistically identical to repeated single
calls; counters advance by the full batch size either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .dist import (
    ONE,
    ZERO,
    DiscreteDist,
    DistributionError,
    ProductDist,
    as_fraction,
    empirical_from_counts,
)
from .optimize import grid_from_eps, optimal_bruteforce
from .revenue import PriceVector

Optimizer = Callable[[ProductDist], tuple[PriceVector, Fraction]]

HELLINGER_TOL = 1e-12  # shared float comparison slack
DEFAULT_SAMPLE_C = 1.0
DEFAULT_QUERY_C = 1000.0


@dataclass(frozen=True)
class LearnerConfig:
    eps: Fraction
    delta: Fraction
    c: float | None = None
    budget_override: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if not 0 < self.eps < 1:
            raise DistributionError(f"eps must be in (0, 1), got {self.eps}")
        if not 0 < self.delta < 1:
            raise DistributionError(f"delta must be in (0, 1), got {self.delta}")
        if self.c is not None and self.c <= 0:
            raise DistributionError(f"c must be positive, got {self.c}")
        if self.budget_override is not None and self.budget_override < 1:
            raise DistributionError(
                f"budget_override must be >= 1, got {self.budget_override}"
            )


class SampleOracle:
    """Releases iid value vectors from the hidden product distribution."""

    def __init__(self, dist: ProductDist, rng: np.random.Generator):
        self._dist = dist
        self._rng = rng
        self.samples_drawn = 0

    @property
    def n(self) -> int:
        return self._dist.n

    @property
    def lattice(self) -> int:
        return self._dist.lattice

    def draw(self) -> tuple[Fraction, ...]:
        self.samples_drawn += 1
        return self._dist.sample_vector(self._rng)

    def draw_counts(self, size: int) -> list[dict[Fraction, int]]:
        """Per-item value counts of `size` fresh vectors (one multinomial each).

        Coordinates of a product draw are independent, so the per-item
        count vectors of a joint batch are exactly independent
        multinomials; only observed values appear in each dict.
        """
        if size < 1:
            raise DistributionError(f"size must be >= 1, got {size}")
        self.samples_drawn += size
        out = []
        for d in self._dist.items:
            counts = d.sample_counts(self._rng, size)
            out.append(
                {v: int(c) for v, c in zip(d.support, counts) if c}
            )
        return out


class QueryOracle:
    """Answers `value >= price` for one fresh hidden draw per query."""

    def __init__(self, dist: ProductDist, rng: np.random.Generator):
        self._dist = dist
        self._rng = rng
        self.total_queries = 0
        self.per_item_queries = [0] * dist.n

    @property
    def n(self) -> int:
        return self._dist.n

    @property
    def lattice(self) -> int:
        return self._dist.lattice

    def _check(self, item: int, price: Fraction) -> Fraction:
        if not 0 <= item < self._dist.n:
            raise DistributionError(f"item {item} out of range")
        price = as_fraction(price)
        if price < 0 or price > 1:
            raise DistributionError(f"price {price} outside [0, 1]")
        return price

    def query(self, item: int, price: Fraction) -> bool:
        price = self._check(item, price)
        self.total_queries += 1
        self.per_item_queries[item] += 1
        return self._dist.items[item].sample(self._rng) >= price

    def query_batch(self, item: int, price: Fraction, count: int) -> int:
        """Number of positive answers among `count` fresh queries."""
        price = self._check(item, price)
        if count < 1:
            raise DistributionError(f"count must be >= 1, got {count}")
        self.total_queries += count
        self.per_item_queries[item] += count
        tail = float(self._dist.items[item].tail(price))
        return int(self._rng.binomial(count, tail))


def bernstein_gamma(n: int, samples: int, delta: Fraction | float) -> float:
    """Uniform CDF deviation scale for n items and `samples` draws."""
    if n < 1 or samples < 1:
        raise DistributionError("n and samples must be >= 1")
    delta = float(delta)
    if not 0 < delta < 1:
        raise DistributionError(f"delta must be in (0, 1), got {delta}")
    return math.log(2 * n * samples / delta) / samples


def check_cdf_bound(d: DiscreteDist, e: DiscreteDist, gamma: float) -> bool:
    """|F_d - F_e| <= sqrt(F_d (1-F_d) 2 gamma) + gamma at every lattice point.

    Both CDFs are constant between union support points, so checking
    there is exhaustive.  Float comparison with 1e-12 slack.
    """
    if d.lattice != e.lattice:
        raise DistributionError("distributions must share a lattice")
    for v in sorted(set(d.support) | set(e.support)):
        f = float(d.cdf(v))
        gap = abs(f - float(e.cdf(v)))
        if gap > math.sqrt(f * (1.0 - f) * 2.0 * gamma) + gamma + HELLINGER_TOL:
            return False
    return True


def scale_prices(prices: Sequence[Fraction], eps: Fraction) -> PriceVector:
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise DistributionError(f"eps must be in (0, 1), got {eps}")
    return tuple((1 - eps) * as_fraction(p) for p in prices)


def sample_count_formula(
    n: int, eps: Fraction, delta: Fraction, c: float = DEFAULT_SAMPLE_C
) -> int:
    """Vector samples drawn by the sample learner when no override is set."""
    x = n / float(as_fraction(eps) * as_fraction(delta))
    lg = math.log(x)
    raw = c * lg**4 * math.log(lg) ** 2 * n / float(eps) ** 2
    return max(1, math.ceil(raw))


def learn_from_samples(
    oracle: SampleOracle,
    cfg: LearnerConfig,
    optimizer: Optimizer | None = None,
) -> PriceVector:
    """Draw a batch of vectors, optimize the empirical product exactly."""
    c = cfg.c if cfg.c is not None else DEFAULT_SAMPLE_C
    size = cfg.budget_override or sample_count_formula(
        oracle.n, cfg.eps, cfg.delta, c
    )
    if optimizer is None:
        grid = grid_from_eps(cfg.eps)
        optimizer = lambda pd: optimal_bruteforce(pd, grid)
    observed = oracle.draw_counts(size)
    items = []
    for seen in observed:
        values = sorted(seen)
        items.append(
            empirical_from_counts(
                values, [seen[v] for v in values], oracle.lattice
            )
        )
    prices, _ = optimizer(ProductDist(tuple(items)))
    return prices


@dataclass(frozen=True)
class QueryLearnTrace:
    """Audit trail of one per-item query-learning run.

    thresholds is the descending chain of key grid indices ending at 0;
    step_lengths[j] is the acceptance margin used while searching below
    thresholds[j]; probes records every estimate made (grid index,
    estimated CDF there) including binary-search probes.
    """

    thresholds: tuple[int, ...]
    step_lengths: tuple[Fraction, ...]
    queries_per_round: tuple[int, ...]
    rounds: int
    probes: tuple[tuple[int, Fraction], ...]

    def to_json_dict(self) -> dict:
        return {
            "k": list(self.thresholds),
            "lambda": [float(x) for x in self.step_lengths],
            "queries_per_threshold": list(self.queries_per_round),
            "R": self.rounds,
        }


def queries_per_threshold(
    n: int, eps: Fraction, delta: Fraction, c: float = DEFAULT_QUERY_C
) -> int:
    x = n / float(as_fraction(eps) * as_fraction(delta))
    return max(1, math.ceil(c * n * math.log(x) / float(eps) ** 2))


def learn_item_by_queries(
    oracle: QueryOracle, item: int, cfg: LearnerConfig
) -> tuple[DiscreteDist, QueryLearnTrace]:
    """Reconstruct one item's CDF on the eps^2 grid from threshold queries.

    Maintains a partial CDF estimate anchored at grid index K = eps^-2
    with value 1.  Each round binary-searches for the highest lower grid
    point whose estimated CDF sits at least half an adaptive step below
    the current anchor, re-estimates there with fresh queries, fills the
    plateau in between with the anchor's value, and tightens the step to
    eps * (estimated tail) + eps/n.  Estimates are exact Fractions
    (positives/queries), a hidden value >= price indicator estimating the
    CDF one grid point below the queried price.  Estimated CDF values are
    clamped monotone, and the mass at 0 is the residual left under the
    final estimate there.
    """
    eps = cfg.eps
    inv_sq = 1 / (eps * eps)
    if inv_sq.denominator != 1:
        raise DistributionError(f"1/eps^2 must be an integer, got {inv_sq}")
    grid_count = int(inv_sq)
    step = eps * eps
    n = oracle.n
    c = cfg.c if cfg.c is not None else DEFAULT_QUERY_C
    per_estimate = cfg.budget_override or queries_per_threshold(
        n, eps, cfg.delta, c
    )
    probes: list[tuple[int, Fraction]] = []

    def estimate(index: int) -> Fraction:
        # Pr[X <= index*step] = 1 - Pr[X >= (index+1)*step] for grid-valued X
        positives = oracle.query_batch(item, (index + 1) * step, per_estimate)
        value = 1 - Fraction(positives, per_estimate)
        probes.append((index, value))
        return value

    cdf_est: dict[int, Fraction] = {grid_count: ONE}
    thresholds = [grid_count]
    step_lengths: list[Fraction] = []
    queries_per_round: list[int] = []
    margin = eps / n
    anchor = grid_count
    while anchor > 0:
        step_lengths.append(margin)
        spent_before = oracle.per_item_queries[item]
        lo, hi = 0, anchor - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if estimate(mid) <= cdf_est[anchor] - margin / 2:
                lo = mid
            else:
                hi = mid - 1
        fresh = estimate(lo)
        if fresh > cdf_est[anchor]:
            fresh = cdf_est[anchor]  # keep the estimated CDF monotone
        cdf_est[lo] = fresh
        for i in range(lo + 1, anchor):
            cdf_est[i] = cdf_est[anchor]
        queries_per_round.append(oracle.per_item_queries[item] - spent_before)
        thresholds.append(lo)
        margin = eps * (1 - fresh) + eps / n
        anchor = lo

    support = []
    masses = []
    prev = ZERO
    for t in range(grid_count + 1):
        m = cdf_est[t] - prev
        prev = cdf_est[t]
        if m > 0:
            support.append(t * step)
            masses.append(m)
    learned = DiscreteDist(
        tuple(support), tuple(masses), step.denominator
    )
    trace = QueryLearnTrace(
        tuple(thresholds),
        tuple(step_lengths),
        tuple(queries_per_round),
        len(thresholds),
        tuple(probes),
    )
    return learned, trace


def query_round_bound(n: int, eps: Fraction) -> float:
    """Worst-case key-threshold count of learn_item_by_queries."""
    e = float(as_fraction(eps))
    return math.log(10 * n / e) / math.log(1 + 0.1 * e) + 3


def learn_product_by_queries(
    oracle: QueryOracle,
    cfg: LearnerConfig,
    optimizer: Optimizer | None = None,
) -> PriceVector:
    """Learn every item's CDF, optimize the reconstruction, scale down.

    The (1 - eps) scaling compensates the downward value rounding built
    into grid-limited queries: a price slightly below a learned good
    price is still affordable under the true values.
    """
    items = []
    for i in range(oracle.n):
        learned, _ = learn_item_by_queries(oracle, i, cfg)
        items.append(learned)
    if optimizer is None:
        grid = grid_from_eps(cfg.eps)
        optimizer = lambda pd: optimal_bruteforce(pd, grid)
    prices, _ = optimizer(ProductDist(tuple(items)))
    return scale_prices(prices, cfg.eps)
