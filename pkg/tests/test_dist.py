"""Distribution plumbing: point queries, distances, envelopes, serialization."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from bupp.dist import (
    DiscreteDist,
    DistributionError,
    LatticeError,
    ProductDist,
    as_fraction,
    bernstein_envelope,
    discretize,
    dominates,
    empirical_from_counts,
    empirical_from_values,
    hellinger_sq,
    hellinger_sq_product,
    iid_product,
    instance_from_dict,
    instance_to_dict,
    kolmogorov,
    make_discrete,
    point_mass,
    refine,
    tv_distance,
    tv_product,
    uniform_lattice,
)
from bupp.instances import base_g, perturbed_g

HALF = F(1, 2)


def bern():
    return make_discrete([F(0), F(1)], [HALF, HALF], 2)


class TestConstruction:
    def test_make_discrete_sorts_and_drops_zero_mass(self):
        d = make_discrete([F(1), F(0), HALF], [F(1, 4), F(0), F(3, 4)])
        assert d.support == (HALF, F(1))
        assert d.masses == (F(3, 4), F(1, 4))

    def test_lattice_inferred_from_denominators(self):
        d = make_discrete([F(1, 3), F(1, 6)], [HALF, HALF])
        assert d.lattice == 6

    def test_point_mass_default_lattice(self):
        assert point_mass(F(1, 3)).lattice == 3
        assert point_mass(0).lattice == 1

    def test_duplicate_support_rejected(self):
        with pytest.raises(DistributionError):
            make_discrete([HALF, HALF], [HALF, HALF])

    def test_masses_must_sum_to_one(self):
        with pytest.raises(DistributionError):
            DiscreteDist((F(0),), (F(3, 4),), 1)

    def test_support_outside_unit_interval_rejected(self):
        with pytest.raises(DistributionError):
            make_discrete([F(3, 2)], [F(1)])

    def test_off_lattice_support_rejected(self):
        with pytest.raises(LatticeError):
            DiscreteDist((F(1, 3),), (F(1),), 2)

    def test_float_input_refused(self):
        with pytest.raises(DistributionError):
            as_fraction(0.5)
        with pytest.raises(DistributionError):
            make_discrete([0.5], [F(1)])

    def test_string_fractions_accepted(self):
        assert as_fraction("1/8") == F(1, 8)
        assert as_fraction("0.125") == F(1, 8)

    def test_uniform_lattice_shape(self):
        d = uniform_lattice(8)
        assert len(d.support) == 9
        assert all(m == F(1, 9) for m in d.masses)
        assert d.cdf(HALF) == F(5, 9)


class TestPointQueries:
    # three-point shape with masses 17/20, 1/10, 1/20 at 0, 1/2, 1
    def test_cdf_at_and_between_support(self):
        d = base_g(10)
        assert d.masses == (F(17, 20), F(1, 10), F(1, 20))
        assert d.cdf(F(1, 4)) == F(17, 20)
        assert d.cdf(HALF) == F(19, 20)
        assert d.cdf(F(3, 4)) == F(19, 20)
        assert d.cdf(F(1)) == 1

    def test_cdf_total_outside_support(self):
        d = make_discrete([F(1, 4), F(3, 4)], [HALF, HALF])
        assert d.cdf(F(1, 8)) == 0
        assert d.cdf(F(1)) == 1

    def test_left_limit_and_tail(self):
        d = base_g(10)
        assert d.cdf_left(HALF) == F(17, 20)
        assert d.tail(HALF) == F(3, 20)
        assert d.tail(F(0)) == 1
        assert d.mass_at(HALF) == F(1, 10)
        assert d.mass_at(F(1, 4)) == 0


class TestSampling:
    def test_same_seed_same_values(self):
        d = base_g(5)
        a = d.sample_values(np.random.default_rng(3), 100)
        b = d.sample_values(np.random.default_rng(3), 100)
        assert a == b

    def test_values_lie_in_support(self):
        d = base_g(5)
        vals = set(d.sample_values(np.random.default_rng(0), 500))
        assert vals <= set(d.support)

    def test_sample_counts_match_size(self):
        d = base_g(5)
        counts = d.sample_counts(np.random.default_rng(1), 1000)
        assert counts.sum() == 1000
        assert len(counts) == 3

    def test_empirical_cdf_close_to_truth(self):
        # Kolmogorov bound at confidence 1 - 1e-6 for 5000 draws
        d = bern()
        emp = empirical_from_values(
            d.sample_values(np.random.default_rng(7), 5000), lattice=2
        )
        radius = math.sqrt(math.log(2 / 1e-6) / (2 * 5000))
        assert float(kolmogorov(d, emp)) <= radius


class TestEmpirical:
    def test_masses_are_exact_counts_over_total(self):
        emp = empirical_from_values([F(0), HALF, HALF, F(1)])
        assert emp.support == (F(0), HALF, F(1))
        assert emp.masses == (F(1, 4), HALF, F(1, 4))

    def test_counts_builder_agrees(self):
        a = empirical_from_counts([F(0), F(1)], [3, 1], 2)
        b = empirical_from_values([F(0), F(0), F(0), F(1)], 2)
        assert a == b

    def test_empty_observations_rejected(self):
        with pytest.raises(DistributionError):
            empirical_from_counts([F(0)], [0])


class TestDiscretize:
    def test_rounds_down_and_aggregates(self):
        d = make_discrete(
            [F(1, 16), F(3, 16), F(5, 16), F(15, 16)],
            [F(1, 4)] * 4,
            16,
        )
        out = discretize(d, F(1, 2))  # step 1/4
        # independent floor: 1/16 -> 0, 3/16 -> 0, 5/16 -> 1/4, 15/16 -> 3/4
        assert out.support == (F(0), F(1, 4), F(3, 4))
        assert out.masses == (HALF, F(1, 4), F(1, 4))
        assert out.lattice == 16

    def test_output_dominated_by_input(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            nums = sorted(rng.choice(65, size=4, replace=False))
            d = make_discrete(
                [F(int(t), 64) for t in nums], [F(1, 4)] * 4, 64
            )
            assert dominates(d, discretize(d, F(1, 4)))

    def test_incompatible_step_rejected(self):
        with pytest.raises(LatticeError):
            discretize(base_g(4), F(1, 8))  # lattice 2, step 1/64

    def test_refine_then_discretize(self):
        out = discretize(refine(base_g(4), 64), F(1, 4))
        assert out.mass_at(HALF) == F(1, 4)


class TestDistances:
    def test_kolmogorov_half_shift(self):
        assert kolmogorov(bern(), refine(point_mass(1), 2)) == HALF

    def test_tv_symmetric_and_exact(self):
        d, e = bern(), refine(point_mass(1), 2)
        assert tv_distance(d, e) == HALF
        assert tv_distance(e, d) == HALF
        assert tv_distance(d, d) == 0

    def test_hellinger_closed_form(self):
        # 1 - sqrt(1/2) for a fair coin against the point mass at 1
        got = hellinger_sq(bern(), refine(point_mass(1), 2))
        assert got == pytest.approx(1 - math.sqrt(0.5), abs=1e-12)

    def test_hellinger_matches_bhattacharyya(self):
        d, e = base_g(10), perturbed_g(10, F(1, 10))
        bc = sum(
            math.sqrt(float(d.mass_at(v) * e.mass_at(v)))
            for v in set(d.support) | set(e.support)
        )
        assert hellinger_sq(d, e) == pytest.approx(1 - bc, abs=1e-12)

    def test_perturbation_pair_is_hellinger_close(self):
        # the hidden gap eps/n at the top value costs under 3 eps^2 / n
        n, eps = 100, F(1, 10)
        h2 = hellinger_sq(base_g(n), perturbed_g(n, eps))
        assert h2 <= 3 * float(eps) ** 2 / n

    def test_lattice_mismatch_raises(self):
        with pytest.raises(LatticeError):
            kolmogorov(base_g(4), uniform_lattice(8))
        with pytest.raises(LatticeError):
            tv_distance(base_g(4), uniform_lattice(8))

    def test_refine_resolves_mismatch(self):
        assert refine(base_g(4), 8).lattice == 8
        with pytest.raises(LatticeError):
            refine(base_g(4), 3)


class TestProductDistances:
    def test_product_hellinger_matches_joint_formula(self):
        pairs = [
            (base_g(5), perturbed_g(5, F(1, 10))),
            (bern(), refine(point_mass(1), 2)),
        ]
        pairs = [(refine(d, 2), refine(e, 2)) for d, e in pairs]
        prod_bc = 1.0
        for d, e in pairs:
            prod_bc *= sum(
                math.sqrt(float(d.mass_at(v) * e.mass_at(v)))
                for v in set(d.support) | set(e.support)
            )
        assert hellinger_sq_product(pairs) == pytest.approx(
            1 - prod_bc, abs=1e-12
        )

    def test_tv_product_single_item_matches_tv(self):
        d, e = base_g(5), perturbed_g(5, F(1, 10))
        assert tv_product(ProductDist((d,)), ProductDist((e,))) == tv_distance(d, e)

    def test_tv_bounded_by_hellinger_both_sides(self):
        d, e = base_g(5), perturbed_g(5, F(1, 5))
        p, q = iid_product(d, 3), iid_product(e, 3)
        tv = float(tv_product(p, q))
        h2 = hellinger_sq_product(zip(p.items, q.items))
        assert h2 <= tv + 1e-12
        assert tv <= math.sqrt(2 * h2) + 1e-12

    def test_tv_product_outcome_cap(self):
        p = iid_product(bern(), 2)
        with pytest.raises(DistributionError):
            tv_product(p, p, max_outcomes=3)


class TestDominance:
    def test_shifting_mass_down_is_dominated(self):
        assert dominates(base_g(10), perturbed_g(10, F(1, 10)))
        assert not dominates(perturbed_g(10, F(1, 10)), base_g(10))

    def test_reflexive(self):
        assert dominates(base_g(10), base_g(10))


class TestBernsteinEnvelope:
    def test_point_mass_splits_gamma_to_zero(self):
        out = bernstein_envelope(point_mass(1), 0.01)
        assert out.support == (F(0), F(1))
        assert out.mass_at(F(0)) == F(0.01)

    def test_envelope_dominated_by_input(self):
        for d in (base_g(7), uniform_lattice(8), bern()):
            assert dominates(d, bernstein_envelope(d, 1 / 64))

    def test_cdf_matches_shift_formula(self):
        # independent route: running max of the shifted cdf values
        d = uniform_lattice(8)
        gamma = 1 / 32
        out = bernstein_envelope(d, gamma)
        hi = 0.0
        for v in sorted({F(0)} | set(d.support)):
            f = float(d.cdf(v))
            hi = max(
                hi, min(1.0, f + math.sqrt(f * (1 - f) * 2 * gamma) + gamma)
            )
            assert float(out.cdf(v)) == pytest.approx(hi, abs=1e-12)

    def test_gamma_range_checked(self):
        with pytest.raises(DistributionError):
            bernstein_envelope(bern(), 0.0)
        with pytest.raises(DistributionError):
            bernstein_envelope(bern(), 1.0)


class TestProducts:
    def test_items_must_share_lattice(self):
        with pytest.raises(LatticeError):
            ProductDist((base_g(4), uniform_lattice(8)))

    def test_vector_sampling_deterministic(self):
        p = iid_product(base_g(5), 3)
        a = p.sample_vector(np.random.default_rng(9))
        b = p.sample_vector(np.random.default_rng(9))
        assert a == b
        assert len(a) == 3

    def test_empty_product_rejected(self):
        with pytest.raises(DistributionError):
            ProductDist(())


class TestSerialization:
    def test_roundtrip_is_exact(self):
        p = ProductDist((base_g(7), perturbed_g(7, F(1, 8))))
        assert instance_from_dict(instance_to_dict(p)) == p

    def test_roundtrip_survives_json(self):
        import json

        p = iid_product(uniform_lattice(8), 2)
        blob = json.dumps(instance_to_dict(p))
        assert instance_from_dict(json.loads(blob)) == p

    def test_unknown_format_rejected(self):
        with pytest.raises(DistributionError):
            instance_from_dict({"format": 99})
        with pytest.raises(DistributionError):
            instance_from_dict([])
