"""Grid optimizers and the two-price closed form."""

import math
from fractions import Fraction as F
from itertools import product as iter_product

import numpy as np
import pytest

from bupp.dist import DistributionError, iid_product, make_discrete, point_mass
from bupp.instances import (
    base_g,
    equal_revenue_dist,
    equal_revenue_grid,
    nonmonotonicity_example,
    query_hard_instance,
    random_instance,
)
from bupp.optimize import (
    check_grid,
    coordinate_ascent,
    exante_optimal,
    grid_from_eps,
    optimal_bruteforce,
    optimal_two_price,
    two_price_revenue,
)
from bupp.revenue import exante_rev, rev

HALF = F(1, 2)


class TestGrids:
    def test_grid_from_eps_is_squared_step(self):
        assert grid_from_eps(HALF) == (F(0), F(1, 4), HALF, F(3, 4), F(1))
        assert len(grid_from_eps(F(1, 3))) == 10

    def test_step_must_divide_one(self):
        with pytest.raises(DistributionError):
            grid_from_eps(F(2, 3))

    def test_check_grid_sorts_and_dedups(self):
        assert check_grid([F(1), HALF, HALF]) == (HALF, F(1))

    def test_check_grid_rejects_bad_input(self):
        with pytest.raises(DistributionError):
            check_grid([])
        with pytest.raises(DistributionError):
            check_grid([F(2)])


class TestBruteforce:
    def test_known_two_item_optimum(self):
        plain, _ = nonmonotonicity_example()
        grid = [F(0), HALF, F(1)]
        best_p, best_r = optimal_bruteforce(plain, grid)
        assert (best_p, best_r) == ((HALF, F(1)), F(3, 4))
        # independent scan over the same 9 vectors
        assert best_r == max(
            rev(plain, combo) for combo in iter_product(grid, repeat=2)
        )

    def test_tie_goes_to_smallest_vector(self):
        # both grid prices earn exactly 1/2 here
        d = iid_product(make_discrete([HALF, F(1)], [HALF, HALF], 2), 1)
        assert rev(d, (HALF,)) == rev(d, (F(1),)) == HALF
        best_p, _ = optimal_bruteforce(d, [HALF, F(1)])
        assert best_p == (HALF,)

    def test_vector_cap(self):
        d = iid_product(point_mass(1), 4)
        with pytest.raises(DistributionError):
            optimal_bruteforce(d, [F(0), HALF, F(1)], max_vectors=80)


class TestTwoPriceClosedForm:
    # frozen from a direct joint-support enumeration of the buyer rule
    DIRECT_N6 = {
        0: F(1214423, 2985984),
        1: F(625529, 1492992),
        2: F(1268779, 2985984),
        3: F(636023, 1492992),
        4: F(1264423, 2985984),
        5: F(312187, 746496),
        6: F(3367, 8192),
    }

    def test_matches_frozen_enumeration(self):
        for m, want in self.DIRECT_N6.items():
            assert two_price_revenue(6, F(m, 6)) == want

    def test_matches_generic_evaluator(self):
        n = 9
        dist = iid_product(base_g(n), n)
        for m in (0, 3, 6, 9):
            prices = (HALF,) * m + (F(1),) * (n - m)
            assert two_price_revenue(n, F(m, n)) == rev(dist, prices)

    def test_all_at_one_edge(self):
        # only top-value draws buy, always at price 1
        n = 5
        a = 1 - F(1, 2 * n)
        assert two_price_revenue(n, F(0)) == 1 - a**n

    def test_all_at_half_edge(self):
        n = 5
        b = 1 - F(3, 2 * n)
        assert two_price_revenue(n, F(1)) == (1 - b**n) / 2

    def test_fractional_count_rejected(self):
        with pytest.raises(DistributionError):
            two_price_revenue(6, F(1, 4))


class TestTwoPriceOptimum:
    def test_matches_independent_argmax(self):
        n = 8
        best_q, best_r = optimal_two_price(n)
        table = [two_price_revenue(n, F(m, n)) for m in range(n + 1)]
        assert best_r == max(table)
        assert best_q == F(table.index(max(table)), n)

    def test_interior_fraction_near_limit(self):
        # the optimal fraction approaches 2 ln 2 - 1 as n grows
        best_q, _ = optimal_two_price(200)
        assert abs(float(best_q) - (math.log(4) - 1)) < 0.03


class TestCoordinateAscent:
    def test_never_beats_bruteforce_and_usually_matches(self):
        matched = 0
        for t in range(60):
            rng = np.random.default_rng([53, t])
            n = int(rng.integers(1, 4))
            dist = random_instance(rng, n, lattice=4, max_support=3)
            grid = [F(k, 4) for k in range(5)]
            _, brute = optimal_bruteforce(dist, grid)
            _, local = coordinate_ascent(dist, grid, starts=6, rng=rng)
            assert local <= brute
            matched += local == brute
        assert matched >= 54

    def test_deterministic_given_seed(self):
        dist = random_instance(np.random.default_rng(1), 3, lattice=4)
        grid = [F(k, 4) for k in range(5)]
        a = coordinate_ascent(dist, grid, starts=4, rng=np.random.default_rng(2))
        b = coordinate_ascent(dist, grid, starts=4, rng=np.random.default_rng(2))
        assert a == b

    def test_starts_validated(self):
        dist = iid_product(point_mass(1), 1)
        with pytest.raises(DistributionError):
            coordinate_ascent(dist, [F(1)], starts=0, rng=np.random.default_rng(0))


class TestExAnteOptimal:
    def test_all_ties_settle_at_lowest_price(self):
        # every grid price earns 1/(2n) per item, so the smallest wins
        dist = iid_product(equal_revenue_dist(4, F(1, 16)), 4)
        prices, value = exante_optimal(dist, equal_revenue_grid(F(1, 16)))
        assert prices == (HALF,) * 4
        assert value == HALF

    def test_recovers_hidden_best_prices(self):
        inst = query_hard_instance(4, F(1, 16), np.random.default_rng([0]))
        prices, _ = exante_optimal(inst.dist, equal_revenue_grid(F(1, 16)))
        assert prices == inst.best_prices()

    def test_exhaustive_fallback_agrees_on_small_instance(self):
        # two heavy items force the sell probabilities over budget
        dist = iid_product(point_mass(1), 2)
        grid = [HALF, F(1)]
        prices, value = exante_optimal(dist, grid)
        assert value == max(
            exante_rev(dist, combo) for combo in iter_product(grid, repeat=2)
        )
        # (1/2, 1) already exhausts the budget at price 1, and enumeration
        # keeps the lexicographically smallest maximizer
        assert prices == (HALF, F(1))
        assert value == 1
