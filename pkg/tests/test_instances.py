"""Instance families and their hidden structure."""

from fractions import Fraction as F

import numpy as np
import pytest

from bupp.dist import DistributionError, dominates, iid_product, point_mass
from bupp.instances import (
    base_g,
    equal_revenue_dist,
    equal_revenue_grid,
    hidden_block,
    identify_perturbed,
    load_instance,
    nonmonotonicity_example,
    perturbed_g,
    query_hard_instance,
    random_instance,
    random_prices,
    sample_hard_instance,
    save_instance,
)
from bupp.learn import SampleOracle
from bupp.revenue import rev

HALF = F(1, 2)


class TestThreePointFamily:
    def test_base_masses(self):
        d = base_g(10)
        assert d.mass_at(F(1)) == F(1, 20)
        assert d.mass_at(HALF) == F(1, 10)
        assert d.mass_at(F(0)) == F(17, 20)
        assert d.lattice == 2

    def test_perturbed_moves_top_mass_down(self):
        d = perturbed_g(10, F(1, 10))
        assert d.mass_at(F(1)) == F(1, 25)  # (1/2 - 1/10) / 10
        assert d.mass_at(HALF) == F(11, 100)
        assert d.mass_at(F(0)) == F(17, 20)

    def test_perturbed_is_dominated(self):
        assert dominates(base_g(10), perturbed_g(10, F(1, 10)))

    def test_parameter_validation(self):
        with pytest.raises(DistributionError):
            base_g(1)
        with pytest.raises(DistributionError):
            perturbed_g(10, HALF)


class TestSampleHard:
    def test_pairing_structure(self):
        inst = sample_hard_instance(8, F(1, 10), np.random.default_rng([0]))
        assert 1 <= len(inst.pairing) <= 4
        for t, (first, second, _) in enumerate(inst.pairing):
            assert (first, second) == (2 * t, 2 * t + 1)

    def test_exactly_one_perturbed_member_per_pair(self):
        inst = sample_hard_instance(8, F(1, 10), np.random.default_rng([0]))
        low = perturbed_g(8, F(1, 10))
        base = base_g(8)
        for first, second, perturbed_first in inst.pairing:
            hot, cold = (first, second) if perturbed_first else (second, first)
            assert inst.dist.items[hot] == low
            assert inst.dist.items[cold] == base
        paired = {i for f, s, _ in inst.pairing for i in (f, s)}
        for i in range(8):
            if i not in paired:
                assert inst.dist.items[i] == base

    def test_assigned_prices_mark_perturbed_members(self):
        inst = sample_hard_instance(8, F(1, 10), np.random.default_rng([1]))
        prices = inst.assigned_prices()
        halves = {i for i, p in enumerate(prices) if p == HALF}
        expected = {
            f if pf else s for f, s, pf in inst.pairing
        }
        assert halves == expected

    def test_swapping_a_pair_changes_two_entries(self):
        inst = sample_hard_instance(8, F(1, 10), np.random.default_rng([1]))
        a, b = inst.assigned_prices(), inst.pair_swapped_prices(0)
        diff = [i for i in range(8) if a[i] != b[i]]
        assert diff == [inst.pairing[0][0], inst.pairing[0][1]]

    def test_swap_loses_at_least_the_margin(self):
        n, eps = 8, F(1, 10)
        inst = sample_hard_instance(n, eps, np.random.default_rng([2]))
        gain = rev(inst.dist, inst.assigned_prices()) - rev(
            inst.dist, inst.pair_swapped_prices(0)
        )
        assert gain >= eps / (5 * n)

    def test_orientations_follow_the_seed(self):
        a = sample_hard_instance(8, F(1, 10), np.random.default_rng([3]))
        b = sample_hard_instance(8, F(1, 10), np.random.default_rng([3]))
        assert a == b


class TestIdentifyPerturbed:
    def test_large_counts_recover_every_pair(self):
        inst = sample_hard_instance(8, F(1, 10), np.random.default_rng([4]))
        oracle = SampleOracle(inst.dist, np.random.default_rng([5]))
        counts = oracle.draw_counts(20000)
        guesses = identify_perturbed(inst, counts, np.random.default_rng([6]))
        assert guesses == [pf for _, _, pf in inst.pairing]

    def test_single_sample_still_answers(self):
        inst = sample_hard_instance(4, F(1, 10), np.random.default_rng([7]))
        oracle = SampleOracle(inst.dist, np.random.default_rng([8]))
        guesses = identify_perturbed(
            inst, oracle.draw_counts(1), np.random.default_rng([9])
        )
        assert len(guesses) == len(inst.pairing)
        assert all(isinstance(g, bool) for g in guesses)


class TestEqualRevenue:
    def test_every_grid_price_earns_the_same(self):
        n, eps = 4, F(1, 16)
        d = equal_revenue_dist(n, eps)
        for p in equal_revenue_grid(eps):
            assert p * d.tail(p) == F(1, 2 * n)

    def test_top_mass_and_entry_probability(self):
        d = equal_revenue_dist(4, F(1, 16))
        assert d.mass_at(F(3, 4)) == F(2, 12)  # tail at the top of the ramp
        assert d.tail(HALF) == F(1, 4)

    def test_grid_runs_half_to_three_quarters(self):
        grid = equal_revenue_grid(F(1, 16))
        assert grid[0] == HALF
        assert grid[-1] == F(3, 4)
        assert len(grid) == 5

    def test_eps_must_divide_evenly(self):
        with pytest.raises(DistributionError):
            equal_revenue_dist(4, F(1, 6))
        with pytest.raises(DistributionError):
            equal_revenue_dist(4, F(2, 7))


class TestQueryHard:
    def test_shift_concentrates_two_steps_of_mass(self):
        n, eps = 4, F(1, 16)
        inst = query_hard_instance(n, eps, np.random.default_rng([10]))
        base = equal_revenue_dist(n, eps)
        for i, k in enumerate(inst.hidden_k):
            item = inst.dist.items[i]
            src = HALF + k * eps
            dst = src + eps
            assert item.mass_at(src) == 0
            assert item.mass_at(dst) == base.mass_at(src) + base.mass_at(dst)

    def test_hidden_indices_in_range(self):
        inst = query_hard_instance(6, F(1, 16), np.random.default_rng([11]))
        assert all(0 <= k < 4 for k in inst.hidden_k)
        assert inst.best_prices() == tuple(
            HALF + (k + 1) * F(1, 16) for k in inst.hidden_k
        )


class TestNonmonotonicity:
    def test_lifted_item_dominates_plain(self):
        plain, lifted = nonmonotonicity_example()
        assert dominates(lifted.items[0], plain.items[0])
        assert plain.items[1] == lifted.items[1]
        assert plain.items[0] == point_mass(HALF, 10)


class TestRandomInstances:
    def test_shape_and_determinism(self):
        a = random_instance(np.random.default_rng([12]), 3, lattice=8, max_support=4)
        b = random_instance(np.random.default_rng([12]), 3, lattice=8, max_support=4)
        assert a == b
        assert a.n == 3
        assert a.lattice == 8
        assert all(len(d.support) <= 4 for d in a.items)

    def test_prices_on_the_lattice(self):
        prices = random_prices(np.random.default_rng([13]), 5, 8)
        assert len(prices) == 5
        assert all((p * 8).denominator == 1 and 0 <= p <= 1 for p in prices)


class TestInstanceFiles:
    def test_roundtrip_without_hidden(self, tmp_path):
        inst = sample_hard_instance(4, F(1, 10), np.random.default_rng([14]))
        path = tmp_path / "inst.json"
        save_instance(path, inst.dist, hidden_block(inst))
        assert load_instance(path) == inst.dist

    def test_hidden_block_only_on_request(self, tmp_path):
        inst = query_hard_instance(4, F(1, 16), np.random.default_rng([15]))
        path = tmp_path / "inst.json"
        save_instance(path, inst.dist, hidden_block(inst))
        dist, hidden = load_instance(path, with_hidden=True)
        assert dist == inst.dist
        assert hidden["family"] == "query-hard"
        assert hidden["k"] == list(inst.hidden_k)

    def test_missing_hidden_reads_as_none(self, tmp_path):
        path = tmp_path / "inst.json"
        save_instance(path, iid_product(base_g(4), 2))
        _, hidden = load_instance(path, with_hidden=True)
        assert hidden is None

    def test_hidden_block_shapes(self):
        s = sample_hard_instance(4, F(1, 10), np.random.default_rng([16]))
        blk = hidden_block(s)
        assert blk["family"] == "sample-hard"
        assert blk["eps"] == [1, 10]
        assert all(len(row) == 3 for row in blk["pairing"])
        with pytest.raises(DistributionError):
            hidden_block(s.dist)
