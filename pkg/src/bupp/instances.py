"""Instance families that stress learners and optimizers.

Three constructions: a three-point base family whose optimal pricing
splits items between 1/2 and 1; a paired variant where each pair hides
which member has its top-value mass lowered (sample-hungry to tell
apart); and an equal-revenue family whose every grid price earns the
same per-item revenue until a hidden one-step perturbation makes a
single price strictly best (query-hungry to locate).  Plus the
two-distribution example showing revenue is not monotone under
stochastic dominance, and random instances for property tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .dist import (
    DiscreteDist,
    DistributionError,
    ProductDist,
    as_fraction,
    instance_from_dict,
    instance_to_dict,
    make_discrete,
    point_mass,
)
from .optimize import optimal_two_price
from .revenue import PriceVector

HALF = Fraction(1, 2)


def base_g(n: int) -> DiscreteDist:
    """Three-point item: value 1 w.p. 1/(2n), 1/2 w.p. 1/n, else 0."""
    if n < 2:
        raise DistributionError(f"n must be >= 2, got {n}")
    return make_discrete(
        [Fraction(0), HALF, Fraction(1)],
        [1 - Fraction(3, 2 * n), Fraction(1, n), Fraction(1, 2 * n)],
        lattice=2,
    )


def perturbed_g(n: int, eps: Fraction) -> DiscreteDist:
    """base_g with eps/n of the top-value mass moved down to 1/2.

    Dominated by base_g; telling the two apart from samples needs the
    top-value counts to resolve a gap of eps/n.
    """
    eps = as_fraction(eps)
    if not 0 < eps < HALF:
        raise DistributionError(f"eps must be in (0, 1/2), got {eps}")
    if n < 2:
        raise DistributionError(f"n must be >= 2, got {n}")
    return make_discrete(
        [Fraction(0), HALF, Fraction(1)],
        [
            1 - Fraction(3, 2 * n),
            (1 + eps) / n,
            (HALF - eps) / n,
        ],
        lattice=2,
    )


@dataclass(frozen=True)
class SampleHardInstance:
    """Paired items where one member per pair is secretly perturbed.

    pairing holds (first_index, second_index, perturbed_first) triples;
    unpaired items are plain base_g.  q_star is the optimal fraction of
    items to price at 1/2 for the all-base instance of the same size.
    """

    n: int
    eps: Fraction
    q_star: Fraction
    pairing: tuple[tuple[int, int, bool], ...]
    dist: ProductDist

    def assigned_prices(self) -> PriceVector:
        """Price each perturbed pair member at 1/2 and everything else at 1."""
        prices = [Fraction(1)] * self.n
        for first, second, perturbed_first in self.pairing:
            prices[first if perturbed_first else second] = HALF
        return tuple(prices)

    def pair_swapped_prices(self, pair: int) -> PriceVector:
        """assigned_prices with one pair's two prices exchanged."""
        first, second, _ = self.pairing[pair]
        prices = list(self.assigned_prices())
        prices[first], prices[second] = prices[second], prices[first]
        return tuple(prices)


def sample_hard_instance(
    n: int, eps: Fraction, rng: np.random.Generator
) -> SampleHardInstance:
    eps = as_fraction(eps)
    if n < 2:
        raise DistributionError(f"need n >= 2 for a nonempty pairing, got {n}")
    q_star, _ = optimal_two_price(n)
    pairs = min(max(round(q_star * n), 1), n // 2)
    base = base_g(n)
    low = perturbed_g(n, eps)
    items: list[DiscreteDist] = [base] * n
    pairing = []
    for t in range(pairs):
        first, second = 2 * t, 2 * t + 1
        perturbed_first = bool(rng.integers(2))
        items[first if perturbed_first else second] = low
        pairing.append((first, second, perturbed_first))
    return SampleHardInstance(
        n, eps, q_star, tuple(pairing), ProductDist(tuple(items))
    )


def identify_perturbed(
    inst: SampleHardInstance,
    counts: list[dict[Fraction, int]],
    rng: np.random.Generator,
) -> list[bool]:
    """Maximum-likelihood guess of perturbed_first for each pair.

    counts[i] maps observed values of item i to their frequencies (the
    shape SampleOracle.draw_counts returns).  Likelihood ties, common at
    tiny sample sizes, are broken by a coin flip from rng.
    """
    base = base_g(inst.n)
    low = perturbed_g(inst.n, inst.eps)

    def loglik(observed: dict[Fraction, int], d: DiscreteDist) -> float:
        total = 0.0
        for v, c in observed.items():
            m = d.mass_at(v)
            if m == 0:
                return float("-inf")
            total += c * math.log(float(m))
        return total

    guesses = []
    for first, second, _ in inst.pairing:
        forward = loglik(counts[first], low) + loglik(counts[second], base)
        backward = loglik(counts[first], base) + loglik(counts[second], low)
        if forward == backward:
            guesses.append(bool(rng.integers(2)))
        else:
            guesses.append(forward > backward)
    return guesses


def equal_revenue_dist(n: int, eps: Fraction) -> DiscreteDist:
    """Every price 1/2 + k*eps earns exactly 1/(2n): price * tail == 1/(2n).

    Support is {0} plus the grid from 1/2 to 3/4 in steps of eps, with
    Pr[X >= 1/2] = 1/n and interior masses between eps/(2n) and 2*eps/n.
    """
    eps = as_fraction(eps)
    steps = 1 / (4 * eps)
    if steps.denominator != 1:
        raise DistributionError(f"1/(4*eps) must be an integer, got {steps}")
    steps = int(steps)
    if n < 2:
        raise DistributionError(f"n must be >= 2, got {n}")
    inv = 1 / eps
    if inv.denominator != 1:
        raise DistributionError(f"1/eps must be an integer, got {inv}")
    lattice = math.lcm(2, int(inv))

    def tail(k: int) -> Fraction:
        return 1 / (2 * n * (HALF + k * eps))

    support = [Fraction(0)]
    masses = [1 - tail(0)]
    for k in range(steps):
        support.append(HALF + k * eps)
        masses.append(tail(k) - tail(k + 1))
    support.append(HALF + steps * eps)  # = 3/4, mass 2/(3n)
    masses.append(tail(steps))
    return make_discrete(support, masses, lattice)


def equal_revenue_grid(eps: Fraction) -> tuple[Fraction, ...]:
    eps = as_fraction(eps)
    steps = int(1 / (4 * eps))
    return tuple(HALF + k * eps for k in range(steps + 1))


@dataclass(frozen=True)
class QueryHardInstance:
    """Per item, the equal-revenue tie is broken at a hidden grid price.

    Item i has the mass at 1/2 + hidden_k[i]*eps moved one step up, so
    1/2 + (hidden_k[i]+1)*eps is its unique best grid price with margin
    at least eps/(4n) over every other grid price.
    """

    n: int
    eps: Fraction
    hidden_k: tuple[int, ...]
    dist: ProductDist

    def best_prices(self) -> PriceVector:
        return tuple(HALF + (k + 1) * self.eps for k in self.hidden_k)


def _shift_one_step(d: DiscreteDist, value: Fraction, step: Fraction) -> DiscreteDist:
    masses = dict(zip(d.support, d.masses))
    moved = masses.pop(value)
    masses[value + step] = masses.get(value + step, Fraction(0)) + moved
    values = sorted(masses)
    return make_discrete(values, [masses[v] for v in values], d.lattice)


def query_hard_instance(
    n: int, eps: Fraction, rng: np.random.Generator
) -> QueryHardInstance:
    eps = as_fraction(eps)
    base = equal_revenue_dist(n, eps)
    steps = int(1 / (4 * eps))
    hidden = [int(k) for k in rng.integers(steps, size=n)]
    items = tuple(
        _shift_one_step(base, HALF + k * eps, eps) for k in hidden
    )
    return QueryHardInstance(n, eps, tuple(hidden), ProductDist(items))


def nonmonotonicity_example() -> tuple[ProductDist, ProductDist]:
    """Two-item products showing dominance does not imply more revenue.

    The second product's first item stochastically dominates the first
    product's, yet at prices (1/2, 1) it earns 0.725 < 0.75: the small
    chance of value 0.6 outbids the price-1 item and diverts the sale to
    the cheap item.
    """
    plain = point_mass(HALF, lattice=10)
    bumped = make_discrete(
        [HALF, Fraction(3, 5)], [Fraction(9, 10), Fraction(1, 10)], 10
    )
    anchor = make_discrete([Fraction(0), Fraction(1)], [HALF, HALF], 10)
    return ProductDist((plain, anchor)), ProductDist((bumped, anchor))


def random_instance(
    rng: np.random.Generator,
    n: int,
    lattice: int = 8,
    max_support: int = 4,
) -> ProductDist:
    """Random product instance for property tests (exact random masses)."""
    items = []
    for _ in range(n):
        size = int(rng.integers(1, max_support + 1))
        numerators = rng.choice(lattice + 1, size=size, replace=False)
        weights = [int(w) for w in rng.integers(1, 10, size=size)]
        total = sum(weights)
        items.append(
            make_discrete(
                [Fraction(int(t), lattice) for t in numerators],
                [Fraction(w, total) for w in weights],
                lattice,
            )
        )
    return ProductDist(tuple(items))


def random_prices(
    rng: np.random.Generator, n: int, lattice: int = 8
) -> PriceVector:
    return tuple(
        Fraction(int(t), lattice) for t in rng.integers(lattice + 1, size=n)
    )


# -- instance files ------------------------------------------------------


def save_instance(
    path: str | Path, dist: ProductDist, hidden: dict | None = None
) -> None:
    payload = instance_to_dict(dist)
    if hidden is not None:
        payload["hidden"] = hidden
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_instance(
    path: str | Path, with_hidden: bool = False
) -> ProductDist | tuple[ProductDist, dict | None]:
    """Read an instance file; learners must leave with_hidden False."""
    payload = json.loads(Path(path).read_text())
    dist = instance_from_dict(payload)
    if with_hidden:
        return dist, payload.get("hidden")
    return dist


def hidden_block(obj: SampleHardInstance | QueryHardInstance) -> dict:
    """The scoring data a learner is never allowed to see."""
    if isinstance(obj, SampleHardInstance):
        return {
            "family": "sample-hard",
            "eps": [obj.eps.numerator, obj.eps.denominator],
            "q_star": [obj.q_star.numerator, obj.q_star.denominator],
            "pairing": [[f, s, int(p)] for f, s, p in obj.pairing],
        }
    if isinstance(obj, QueryHardInstance):
        return {
            "family": "query-hard",
            "eps": [obj.eps.numerator, obj.eps.denominator],
            "k": list(obj.hidden_k),
        }
    raise DistributionError(f"no hidden data for {type(obj).__name__}")
