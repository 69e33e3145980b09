"""Exact expected revenue of posted item prices for a unit-demand buyer.

The buyer sees one price per item, draws a value vector, and buys the
single item maximizing value minus price among those with nonnegative
utility (zero utility still buys).  Utility ties go to the item with the
higher price, and among equal prices to the higher original index.  The
same rule is applied here in three independent ways: a closed form over
ranked CDF products (`rev`), joint-support enumeration (`rev_bruteforce`),
and vectorized Monte Carlo (`rev_monte_carlo`).  The first two agree
exactly as rationals; the third agrees statistically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _iter_product
from typing import Sequence

import numpy as np

from .dist import ONE, ZERO, DiscreteDist, DistributionError, ProductDist

PriceVector = tuple[Fraction, ...]


def check_prices(dist: ProductDist, prices: Sequence[Fraction]) -> PriceVector:
    if len(prices) != dist.n:
        raise DistributionError(
            f"expected {dist.n} prices, got {len(prices)}"
        )
    out = []
    for p in prices:
        if not isinstance(p, Fraction):
            raise DistributionError(f"price {p!r} is not a Fraction")
        if p < 0 or p > 1:
            raise DistributionError(f"price {p} outside [0, 1]")
        out.append(p)
    return tuple(out)


@dataclass(frozen=True)
class WinProfile:
    """Purchase probability per item plus the no-purchase probability.

    The components partition the outcome space, so they sum to exactly 1;
    the constructor enforces this.
    """

    per_item: tuple[Fraction, ...]
    no_purchase: Fraction

    def __post_init__(self):
        total = sum(self.per_item, self.no_purchase)
        if total != 1:
            raise DistributionError(f"win profile sums to {total}, expected 1")


def _rank_order(prices: PriceVector) -> list[int]:
    # low price first; equal prices by original index, so later ranks win ties
    return sorted(range(len(prices)), key=lambda i: (prices[i], i))


def win_probabilities(dist: ProductDist, prices: Sequence[Fraction]) -> WinProfile:
    """Exact purchase probabilities under the shared tie rule.

    Item i buying at utility theta requires every lower-ranked item to sit
    at utility <= theta and every higher-ranked item strictly below theta.
    """
    prices = check_prices(dist, prices)
    order = _rank_order(prices)
    n = dist.n
    per_item = [ZERO] * n
    for rank, i in enumerate(order):
        d = dist.items[i]
        p = prices[i]
        acc = ZERO
        for v, m in zip(d.support, d.masses):
            if v < p:
                continue
            theta = v - p
            q = ONE
            for rank_j, j in enumerate(order):
                if j == i:
                    continue
                e = dist.items[j]
                x = prices[j] + theta
                q *= e.cdf(x) if rank_j < rank else e.cdf_left(x)
                if q == 0:
                    break
            acc += m * q
        per_item[i] = acc
    none = ONE
    for i in range(n):
        none *= dist.items[i].cdf_left(prices[i])
    return WinProfile(tuple(per_item), none)


def rev(dist: ProductDist, prices: Sequence[Fraction]) -> Fraction:
    """Exact expected revenue sum_i p_i * Pr[item i is bought]."""
    profile = win_probabilities(dist, prices)
    prices = check_prices(dist, prices)
    return sum(
        (p * w for p, w in zip(prices, profile.per_item)), ZERO
    )


def buyer_choice(
    values: Sequence[Fraction], prices: Sequence[Fraction]
) -> int | None:
    """Index bought for one realized value vector, or None for no purchase."""
    best = None
    best_key = None
    for i, (v, p) in enumerate(zip(values, prices)):
        u = v - p
        if u < 0:
            continue
        key = (u, p, i)
        if best_key is None or key > best_key:
            best_key = key
            best = i
    return best


def rev_bruteforce(
    dist: ProductDist, prices: Sequence[Fraction], max_outcomes: int = 10**6
) -> Fraction:
    """Exact revenue by enumerating the joint support.

    Independent of `rev`: walks every outcome and applies the per-outcome
    choice rule.  Joint support size is capped at max_outcomes.
    """
    prices = check_prices(dist, prices)
    size = 1
    for d in dist.items:
        size *= len(d.support)
        if size > max_outcomes:
            raise DistributionError(f"joint support exceeds cap {max_outcomes}")
    total = ZERO
    for combo in _iter_product(*(range(len(d.support)) for d in dist.items)):
        mass = ONE
        values = []
        for d, k in zip(dist.items, combo):
            mass *= d.masses[k]
            values.append(d.support[k])
        choice = buyer_choice(values, prices)
        if choice is not None:
            total += mass * prices[choice]
    return total


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int


def rev_monte_carlo(
    dist: ProductDist,
    prices: Sequence[Fraction],
    trials: int,
    rng: np.random.Generator,
) -> MonteCarloEstimate:
    """Sampled revenue with standard error.

    Works on integer numerators over the shared lattice so that utility
    ties resolve exactly as in the closed form.
    """
    prices = check_prices(dist, prices)
    n = dist.n
    lattice = dist.lattice
    values = np.empty((trials, n), dtype=np.int64)
    for i, d in enumerate(dist.items):
        nums = np.array([int(v * lattice) for v in d.support], dtype=np.int64)
        values[:, i] = nums[d._sample_indices(rng, trials)]
    price_nums = np.array([int(p * lattice) for p in prices], dtype=np.int64)
    util = values - price_nums[None, :]
    eligible = util >= 0
    # lexicographic (utility, price, index) packed into one int64 key
    key = (util * (lattice + 1) + price_nums[None, :]) * (n + 1) + np.arange(n)
    key = np.where(eligible, key, np.int64(-1))
    winner = np.argmax(key, axis=1)
    any_buy = eligible.any(axis=1)
    price_floats = np.array([float(p) for p in prices])
    revenue = np.where(any_buy, price_floats[winner], 0.0)
    mean = float(revenue.mean())
    spread = float(revenue.std(ddof=1)) if trials > 1 else 0.0
    return MonteCarloEstimate(mean, spread / np.sqrt(trials), trials)


def exante_rev(dist: ProductDist, prices: Sequence[Fraction]) -> Fraction:
    """Optimal value of the ex-ante relaxation at these prices.

    Maximize sum q_i p_i subject to sum q_i <= 1 and q_i <= Pr[v_i >= p_i].
    A fractional-knapsack greedy over descending prices solves it exactly.
    """
    prices = check_prices(dist, prices)
    budget = ONE
    total = ZERO
    for i in sorted(range(dist.n), key=lambda i: prices[i], reverse=True):
        if budget == 0:
            break
        q = min(dist.items[i].tail(prices[i]), budget)
        total += q * prices[i]
        budget -= q
    return total
