"""Exact discrete value distributions on a shared rational lattice.

Every value lives on the grid {0, 1/L, 2/L, ..., 1} for a per-instance
denominator L, and every probability is a `fractions.Fraction`.  CDF
queries, dominance checks, total variation and Kolmogorov distances are
therefore exact.  Squared Hellinger distance is the one floating-point
quantity in this module (square roots are irrational); its documented
tolerance is 1e-12.

Binary operations require both operands to share the same lattice and
raise `LatticeError` otherwise; `refine` moves a distribution onto a
finer, compatible lattice.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _iter_product
from typing import Iterable, Sequence

import numpy as np

HELLINGER_TOL = 1e-12

ZERO = Fraction(0)
ONE = Fraction(1)


class LatticeError(ValueError):
    """Raised when values do not fit, or operands do not share, a lattice."""


class DistributionError(ValueError):
    """Raised for invalid support or mass data."""


def as_fraction(x) -> Fraction:
    """Coerce ints, strings like '1/8' or '0.125', and Fractions exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise DistributionError(
            f"refusing to coerce float {x!r}; pass a Fraction or a string"
        )
    return Fraction(x)


def _on_lattice(v: Fraction, lattice: int) -> bool:
    return (v * lattice).denominator == 1


@dataclass(frozen=True)
class DiscreteDist:
    """A finitely supported value distribution on [0, 1].

    support is strictly increasing, all masses are positive Fractions
    summing to exactly 1, and every support point is a multiple of
    1/lattice.  Instances are immutable and safe to share.
    """

    support: tuple[Fraction, ...]
    masses: tuple[Fraction, ...]
    lattice: int

    def __post_init__(self):
        if self.lattice < 1:
            raise LatticeError(f"lattice must be >= 1, got {self.lattice}")
        if len(self.support) != len(self.masses):
            raise DistributionError("support and masses must have equal length")
        if not self.support:
            raise DistributionError("support must be nonempty")
        prev = None
        for v in self.support:
            if not isinstance(v, Fraction):
                raise DistributionError(f"support value {v!r} is not a Fraction")
            if v < 0 or v > 1:
                raise DistributionError(f"support value {v} outside [0, 1]")
            if not _on_lattice(v, self.lattice):
                raise LatticeError(
                    f"support value {v} not a multiple of 1/{self.lattice}"
                )
            if prev is not None and v <= prev:
                raise DistributionError("support must be strictly increasing")
            prev = v
        total = ZERO
        for m in self.masses:
            if not isinstance(m, Fraction):
                raise DistributionError(f"mass {m!r} is not a Fraction")
            if m <= 0:
                raise DistributionError(f"mass {m} must be positive")
            total += m
        if total != 1:
            raise DistributionError(f"masses sum to {total}, expected 1")
        cum = []
        acc = ZERO
        for m in self.masses:
            acc += m
            cum.append(acc)
        object.__setattr__(self, "_cum", tuple(cum))
        object.__setattr__(self, "_probs_float", None)

    # -- point queries ---------------------------------------------------

    def mass_at(self, v: Fraction) -> Fraction:
        i = bisect_left(self.support, v)
        if i < len(self.support) and self.support[i] == v:
            return self.masses[i]
        return ZERO

    def cdf(self, v: Fraction) -> Fraction:
        """Pr[X <= v].  Total on all rationals: 0 below the support, 1 above."""
        i = bisect_right(self.support, v)
        return self._cum[i - 1] if i else ZERO

    def cdf_left(self, v: Fraction) -> Fraction:
        """Left limit Pr[X < v]."""
        i = bisect_left(self.support, v)
        return self._cum[i - 1] if i else ZERO

    def tail(self, v: Fraction) -> Fraction:
        """Pr[X >= v]."""
        return ONE - self.cdf_left(v)

    # -- sampling --------------------------------------------------------

    def _float_probs(self) -> np.ndarray:
        p = self._probs_float
        if p is None:
            p = np.array([float(m) for m in self.masses], dtype=float)
            p /= p.sum()
            object.__setattr__(self, "_probs_float", p)
        return p

    def sample(self, rng: np.random.Generator) -> Fraction:
        return self.support[self._sample_indices(rng, 1)[0]]

    def sample_values(self, rng: np.random.Generator, size: int) -> list[Fraction]:
        return [self.support[i] for i in self._sample_indices(rng, size)]

    def _sample_indices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(len(self.support), size=size, p=self._float_probs())

    def sample_counts(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Counts per support point of `size` iid draws (one multinomial)."""
        return rng.multinomial(size, self._float_probs())


def make_discrete(
    support: Sequence[Fraction],
    masses: Sequence[Fraction],
    lattice: int | None = None,
) -> DiscreteDist:
    """Build a DiscreteDist from parallel value/mass sequences.

    Zero-mass entries are dropped, entries are sorted by value, and the
    lattice defaults to the least common denominator of the support.
    """
    if len(support) != len(masses):
        raise DistributionError("support and masses must have equal length")
    pairs = {}
    for v, m in zip(support, masses):
        v = as_fraction(v)
        m = as_fraction(m)
        if m == 0:
            continue
        if v in pairs:
            raise DistributionError(f"duplicate support value {v}")
        pairs[v] = m
    values = sorted(pairs)
    if lattice is None:
        lattice = math.lcm(1, *(v.denominator for v in values))
    return DiscreteDist(tuple(values), tuple(pairs[v] for v in values), lattice)


def point_mass(v, lattice: int | None = None) -> DiscreteDist:
    return make_discrete([as_fraction(v)], [ONE], lattice)


def uniform_lattice(lattice: int) -> DiscreteDist:
    """Uniform over all lattice points 0, 1/L, ..., 1."""
    n = lattice + 1
    return make_discrete(
        [Fraction(t, lattice) for t in range(n)],
        [Fraction(1, n)] * n,
        lattice,
    )


def empirical_from_counts(
    support: Sequence[Fraction],
    counts: Sequence[int],
    lattice: int | None = None,
) -> DiscreteDist:
    total = int(sum(counts))
    if total <= 0:
        raise DistributionError("need at least one observation")
    return make_discrete(
        list(support), [Fraction(int(c), total) for c in counts], lattice
    )


def empirical_from_values(
    values: Sequence[Fraction], lattice: int | None = None
) -> DiscreteDist:
    """Empirical distribution of observed values, masses count/N exactly."""
    counts: dict[Fraction, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    keys = sorted(counts)
    return empirical_from_counts(keys, [counts[k] for k in keys], lattice)


def refine(d: DiscreteDist, lattice: int) -> DiscreteDist:
    """The same distribution tagged with a finer lattice."""
    if lattice % d.lattice:
        raise LatticeError(
            f"lattice {lattice} is not a multiple of {d.lattice}"
        )
    return DiscreteDist(d.support, d.masses, lattice)


def _require_same_lattice(d: DiscreteDist, e: DiscreteDist) -> None:
    if d.lattice != e.lattice:
        raise LatticeError(
            f"lattice mismatch: {d.lattice} vs {e.lattice} (refine first)"
        )


def discretize(d: DiscreteDist, eps: Fraction) -> DiscreteDist:
    """Round every value down to a multiple of eps^2.

    The step eps^2 must divide the lattice; refine the input first if it
    does not.  Output stays on the same lattice and is dominated by the
    input (rounding down can only lower values).
    """
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise DistributionError(f"eps must be in (0, 1), got {eps}")
    step = eps * eps
    if d.lattice % step.denominator:
        raise LatticeError(
            f"step {step} does not divide lattice 1/{d.lattice}; refine first"
        )
    grouped: dict[Fraction, Fraction] = {}
    for v, m in zip(d.support, d.masses):
        down = (v // step) * step
        grouped[down] = grouped.get(down, ZERO) + m
    values = sorted(grouped)
    return DiscreteDist(
        tuple(values), tuple(grouped[v] for v in values), d.lattice
    )


def _union_support(d: DiscreteDist, e: DiscreteDist) -> list[Fraction]:
    return sorted(set(d.support) | set(e.support))


def kolmogorov(d: DiscreteDist, e: DiscreteDist) -> Fraction:
    """sup_v |F_d(v) - F_e(v)|, attained at a support point."""
    _require_same_lattice(d, e)
    best = ZERO
    for v in _union_support(d, e):
        gap = abs(d.cdf(v) - e.cdf(v))
        if gap > best:
            best = gap
    return best


def tv_distance(d: DiscreteDist, e: DiscreteDist) -> Fraction:
    """Total variation distance, half the L1 gap between mass functions."""
    _require_same_lattice(d, e)
    acc = ZERO
    for v in _union_support(d, e):
        acc += abs(d.mass_at(v) - e.mass_at(v))
    return acc / 2


def hellinger_sq(d: DiscreteDist, e: DiscreteDist) -> float:
    """Squared Hellinger distance (floating point, tolerance 1e-12)."""
    _require_same_lattice(d, e)
    acc = 0.0
    for v in _union_support(d, e):
        acc += (math.sqrt(d.mass_at(v)) - math.sqrt(e.mass_at(v))) ** 2
    return acc / 2


def hellinger_sq_product(pairs: Iterable[tuple[DiscreteDist, DiscreteDist]]) -> float:
    """Squared Hellinger distance between product distributions.

    Uses 1 - H^2 = prod_i (1 - H_i^2) over the coordinate pairs.
    """
    prod = 1.0
    for d, e in pairs:
        prod *= 1.0 - hellinger_sq(d, e)
    return 1.0 - prod


def dominates(d: DiscreteDist, e: DiscreteDist) -> bool:
    """True when d is stochastically at least e: F_d(v) <= F_e(v) everywhere."""
    _require_same_lattice(d, e)
    return all(d.cdf(v) <= e.cdf(v) for v in _union_support(d, e))


def bernstein_envelope(d: DiscreteDist, gamma: float) -> DiscreteDist:
    """Shift the CDF up by its Bernstein radius, capped at 1.

    The new CDF at v is min{1, F(v) + sqrt(F(v)(1 - F(v)) * 2*gamma) + gamma};
    the result is a valid distribution on the same lattice and is dominated
    by the input.  The radius involves a square root, so masses are exact
    Fractions of the rounded float values.
    """
    if not 0 < gamma < 1:
        raise DistributionError(f"gamma must be in (0, 1), got {gamma}")
    points = sorted({ZERO} | set(d.support))
    cdf_vals = []
    hi = ZERO
    for v in points:
        f = float(d.cdf(v))
        shifted = min(1.0, f + math.sqrt(max(f * (1.0 - f), 0.0) * 2.0 * gamma) + gamma)
        exact = Fraction(shifted)
        if exact < hi:  # float noise can dip; keep the CDF monotone
            exact = hi
        hi = exact
        cdf_vals.append(exact)
    masses = []
    prev = ZERO
    for f in cdf_vals:
        masses.append(f - prev)
        prev = f
    return make_discrete(points, masses, d.lattice)


@dataclass(frozen=True)
class ProductDist:
    """Independent items, one DiscreteDist per item, all on one lattice."""

    items: tuple[DiscreteDist, ...]

    def __post_init__(self):
        items = tuple(self.items)
        object.__setattr__(self, "items", items)
        if not items:
            raise DistributionError("need at least one item")
        lattice = items[0].lattice
        for d in items[1:]:
            if d.lattice != lattice:
                raise LatticeError("all items must share one lattice")

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def lattice(self) -> int:
        return self.items[0].lattice

    def sample_vector(self, rng: np.random.Generator) -> tuple[Fraction, ...]:
        return tuple(d.sample(rng) for d in self.items)


def iid_product(d: DiscreteDist, n: int) -> ProductDist:
    return ProductDist((d,) * n)


def tv_product(p: ProductDist, q: ProductDist, max_outcomes: int = 10**6) -> Fraction:
    """Exact total variation between two product distributions.

    Enumerates the joint support, so it is only for small instances; the
    outcome count is capped at max_outcomes.
    """
    if p.n != q.n:
        raise DistributionError("product distributions must have equal n")
    supports = []
    size = 1
    for d, e in zip(p.items, q.items):
        _require_same_lattice(d, e)
        union = _union_support(d, e)
        size *= len(union)
        if size > max_outcomes:
            raise DistributionError(f"joint support exceeds cap {max_outcomes}")
        supports.append(union)
    acc = ZERO
    for combo in _iter_product(*supports):
        mp = ONE
        mq = ONE
        for d, e, v in zip(p.items, q.items, combo):
            mp *= d.mass_at(v)
            mq *= e.mass_at(v)
        acc += abs(mp - mq)
    return acc / 2


# -- JSON instance format ------------------------------------------------
#
# {"format": 1, "lattice": L,
#  "items": [{"support": [int numerators over L], "masses": [[num, den], ...]}]}

FORMAT_VERSION = 1


def instance_to_dict(pd: ProductDist) -> dict:
    return {
        "format": FORMAT_VERSION,
        "lattice": pd.lattice,
        "items": [
            {
                "support": [int(v * pd.lattice) for v in d.support],
                "masses": [[m.numerator, m.denominator] for m in d.masses],
            }
            for d in pd.items
        ],
    }


def instance_from_dict(data: dict) -> ProductDist:
    if not isinstance(data, dict) or data.get("format") != FORMAT_VERSION:
        raise DistributionError(
            f"unsupported instance format: {data.get('format') if isinstance(data, dict) else data!r}"
        )
    lattice = int(data["lattice"])
    items = []
    for entry in data["items"]:
        support = [Fraction(int(t), lattice) for t in entry["support"]]
        masses = [Fraction(int(num), int(den)) for num, den in entry["masses"]]
        items.append(make_discrete(support, masses, lattice))
    return ProductDist(tuple(items))
