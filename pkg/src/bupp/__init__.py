"""Posted-price revenue tools for a unit-demand buyer.

Exact rational evaluation of item pricings, grid optimizers, learners
working from samples or threshold queries, hard instance families, and a
deterministic experiment harness.
"""

from .dist import (
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
from .revenue import (
    MonteCarloEstimate,
    WinProfile,
    buyer_choice,
    exante_rev,
    rev,
    rev_bruteforce,
    rev_monte_carlo,
    win_probabilities,
)
from .optimize import (
    coordinate_ascent,
    exante_optimal,
    grid_from_eps,
    optimal_bruteforce,
    optimal_two_price,
    two_price_revenue,
)
from .learn import (
    LearnerConfig,
    QueryLearnTrace,
    QueryOracle,
    SampleOracle,
    bernstein_gamma,
    check_cdf_bound,
    learn_from_samples,
    learn_item_by_queries,
    learn_product_by_queries,
    query_round_bound,
    scale_prices,
)
from .instances import (
    QueryHardInstance,
    SampleHardInstance,
    base_g,
    equal_revenue_dist,
    equal_revenue_grid,
    load_instance,
    nonmonotonicity_example,
    perturbed_g,
    query_hard_instance,
    random_instance,
    random_prices,
    sample_hard_instance,
    save_instance,
)
from .experiment import (
    ExperimentRecord,
    ExperimentSpec,
    export_csv,
    read_csv,
    run_experiment,
)
from .verify import VerificationReport, verify_lemma

__version__ = "0.1.0"
