"""Price optimization over finite grids.

Exhaustive search and coordinate ascent for the posted-price objective,
a closed form for the two-price family on the base three-point instance,
and the ex-ante relaxation optimum.  All revenue comparisons are exact
rationals; ties always resolve to the lexicographically smallest vector
so results are reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as _iter_product
from typing import Sequence

import numpy as np

from .dist import ONE, ZERO, DistributionError, ProductDist, as_fraction
from .revenue import PriceVector, exante_rev, rev

PriceGrid = tuple[Fraction, ...]

MAX_GRID_VECTORS = 10**7


def check_grid(grid: Sequence[Fraction]) -> PriceGrid:
    out = sorted({as_fraction(p) for p in grid})
    if not out:
        raise DistributionError("price grid must be nonempty")
    if out[0] < 0 or out[-1] > 1:
        raise DistributionError("grid prices must lie in [0, 1]")
    return tuple(out)


def grid_from_eps(eps: Fraction) -> PriceGrid:
    """All multiples of eps^2 in [0, 1]."""
    eps = as_fraction(eps)
    step = eps * eps
    count = int(1 / step)
    if count * step != 1:
        raise DistributionError(f"1 is not a multiple of {step}")
    return tuple(t * step for t in range(count + 1))


def _guard_size(grid: PriceGrid, n: int, cap: int) -> None:
    if len(grid) ** n > cap:
        raise DistributionError(
            f"{len(grid)}^{n} grid vectors exceed cap {cap}"
        )


def optimal_bruteforce(
    dist: ProductDist, grid: Sequence[Fraction], max_vectors: int = MAX_GRID_VECTORS
) -> tuple[PriceVector, Fraction]:
    """Exact optimum over all grid price vectors.

    Enumerates lexicographically and keeps strict improvements only, so
    the returned vector is the smallest maximizer.
    """
    grid = check_grid(grid)
    _guard_size(grid, dist.n, max_vectors)
    best_p = None
    best_r = None
    for combo in _iter_product(grid, repeat=dist.n):
        r = rev(dist, combo)
        if best_r is None or r > best_r:
            best_r = r
            best_p = combo
    return best_p, best_r


def two_price_revenue(n: int, q: Fraction) -> Fraction:
    """Exact revenue of pricing a q fraction of items at 1/2, the rest at 1.

    Items are iid with masses {1: 1/(2n), 1/2: 1/n, 0: 1 - 3/(2n)}.  With
    m = q*n items priced 1/2: revenue is 1 when some price-1 item has value
    1 and no price-1/2 item does (a price-1/2 item with value 1 gets
    utility 1/2 and grabs the sale); revenue is 0 when no price-1 item has
    value 1 and every price-1/2 item has value 0; revenue is 1/2 otherwise.
    """
    q = as_fraction(q)
    if n < 1:
        raise DistributionError(f"n must be >= 1, got {n}")
    m = q * n
    if m.denominator != 1 or m < 0 or m > n:
        raise DistributionError(f"q*n must be an integer in [0, n], got {m}")
    m = int(m)
    a = 1 - Fraction(1, 2 * n)  # Pr[value != 1]
    b = 1 - Fraction(3, 2 * n)  # Pr[value == 0]
    p_one = a**m - a**n
    p_zero = a ** (n - m) * b**m
    return p_one + (1 - p_one - p_zero) / 2


def optimal_two_price(n: int) -> tuple[Fraction, Fraction]:
    """Exact argmax of two_price_revenue over q in {0, 1/n, ..., 1}.

    Returns (q, revenue); ties go to the smallest q.  Powers are built
    incrementally so n around 1000 stays fast despite exact arithmetic.
    """
    if n < 1:
        raise DistributionError(f"n must be >= 1, got {n}")
    a = 1 - Fraction(1, 2 * n)
    b = 1 - Fraction(3, 2 * n)
    a_pow = [ONE]
    b_pow = [ONE]
    for _ in range(n):
        a_pow.append(a_pow[-1] * a)
        b_pow.append(b_pow[-1] * b)
    best_m = 0
    best_r = None
    for m in range(n + 1):
        p_one = a_pow[m] - a_pow[n]
        p_zero = a_pow[n - m] * b_pow[m]
        r = p_one + (1 - p_one - p_zero) / 2
        if best_r is None or r > best_r:
            best_r = r
            best_m = m
    return Fraction(best_m, n), best_r


def coordinate_ascent(
    dist: ProductDist,
    grid: Sequence[Fraction],
    starts: int,
    rng: np.random.Generator,
) -> tuple[PriceVector, Fraction]:
    """Local search: sweep coordinates, accept strict improvements only.

    Restarted from `starts` random grid vectors; deterministic for a fixed
    rng state.  Returns the best local optimum found (can be globally
    suboptimal).
    """
    grid = check_grid(grid)
    if starts < 1:
        raise DistributionError(f"starts must be >= 1, got {starts}")
    n = dist.n
    best_p = None
    best_r = None
    for _ in range(starts):
        current = [grid[k] for k in rng.integers(len(grid), size=n)]
        value = rev(dist, current)
        improved = True
        while improved:
            improved = False
            for i in range(n):
                keep = current[i]
                for candidate in grid:
                    if candidate == keep:
                        continue
                    current[i] = candidate
                    r = rev(dist, current)
                    if r > value:
                        value = r
                        keep = candidate
                        improved = True
                current[i] = keep
        p = tuple(current)
        if best_r is None or value > best_r or (value == best_r and p < best_p):
            best_r = value
            best_p = p
    return best_p, best_r


def exante_optimal(
    dist: ProductDist, grid: Sequence[Fraction], max_vectors: int = MAX_GRID_VECTORS
) -> tuple[PriceVector, Fraction]:
    """Exact maximizer of the ex-ante relaxation over grid price vectors.

    Fast path: when per-item monopoly prices have sell probabilities
    summing to at most 1 the relaxation decouples, so those prices are
    provably optimal (ties to the smallest price).  Otherwise falls back
    to exhaustive search over the grid.
    """
    grid = check_grid(grid)
    monopoly = []
    slack = ZERO
    for d in dist.items:
        best_p = None
        best_r = None
        for p in grid:
            r = p * d.tail(p)
            if best_r is None or r > best_r:
                best_r = r
                best_p = p
        monopoly.append(best_p)
        slack += d.tail(best_p)
    if slack <= 1:
        prices = tuple(monopoly)
        return prices, exante_rev(dist, prices)
    _guard_size(grid, dist.n, max_vectors)
    best_p = None
    best_r = None
    for combo in _iter_product(grid, repeat=dist.n):
        r = exante_rev(dist, combo)
        if best_r is None or r > best_r:
            best_r = r
            best_p = combo
    return best_p, best_r
