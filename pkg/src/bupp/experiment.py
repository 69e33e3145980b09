"""Budget-sweep experiments with deterministic, thread-count-independent output.

An ExperimentSpec pins everything: instance family and parameters (or an
instance file), learner mode, budgets, trial count, and a master seed.
Each (budget, trial) cell reseeds its own generator from the triple
[master_seed, budget, trial], so records are identical no matter how the
work is scheduled; results are keyed and sorted before export.  Set the
env var BUPP_THREADS above 1 to fan trials out over processes.

Wall-clock timing is opt-in ("timing": true): it is the one inherently
nondeterministic column, so by default wall_time_ms is written as 0 and
repeated runs produce byte-identical CSV.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .dist import (
    DistributionError,
    ProductDist,
    as_fraction,
    iid_product,
    instance_from_dict,
    instance_to_dict,
)
from .instances import (
    base_g,
    equal_revenue_dist,
    equal_revenue_grid,
    identify_perturbed,
    load_instance,
    nonmonotonicity_example,
    query_hard_instance,
    random_instance,
    sample_hard_instance,
)
from .learn import (
    LearnerConfig,
    QueryOracle,
    SampleOracle,
    learn_from_samples,
    learn_product_by_queries,
)
from .optimize import coordinate_ascent, optimal_bruteforce
from .revenue import rev

HALF = Fraction(1, 2)

CSV_COLUMNS = "budget,trial,revenue_loss,queries_used,samples_used,wall_time_ms"


@dataclass(frozen=True)
class ExperimentRecord:
    budget: int
    trial: int
    revenue_loss: float
    queries_used: int
    samples_used: int
    wall_time_ms: float


@dataclass(frozen=True)
class ExperimentSpec:
    learner: str  # "sample" | "query"
    budgets: tuple[int, ...]
    trials: int
    master_seed: int
    eps: Fraction
    delta: Fraction
    family: str | None = None
    params: dict | None = None
    instance_path: str | None = None
    optimizer: str = "brute"
    grid: tuple[Fraction, ...] | None = None
    c: float | None = None
    timing: bool = False

    def __post_init__(self):
        if self.learner not in ("sample", "query"):
            raise DistributionError(f"unknown learner {self.learner!r}")
        if self.optimizer not in ("brute", "coord"):
            raise DistributionError(f"unknown optimizer {self.optimizer!r}")
        if (self.family is None) == (self.instance_path is None):
            raise DistributionError(
                "give exactly one of family or instance_path"
            )
        if not self.budgets or any(b < 1 for b in self.budgets):
            raise DistributionError("budgets must be positive")
        if self.trials < 1:
            raise DistributionError("trials must be >= 1")

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentSpec":
        grid = data.get("grid")
        return cls(
            learner=data["learner"],
            budgets=tuple(int(b) for b in data["budgets"]),
            trials=int(data["trials"]),
            master_seed=int(data["master_seed"]),
            eps=as_fraction(data["eps"]),
            delta=as_fraction(data["delta"]),
            family=data.get("family"),
            params=data.get("params"),
            instance_path=data.get("instance"),
            optimizer=data.get("optimizer", "brute"),
            grid=tuple(as_fraction(g) for g in grid) if grid else None,
            c=float(data["c"]) if "c" in data and data["c"] is not None else None,
            timing=bool(data.get("timing", False)),
        )


def build_instance(spec: ExperimentSpec) -> tuple[ProductDist, tuple[Fraction, ...]]:
    """The (fixed) instance and its natural price grid for this spec."""
    if spec.instance_path is not None:
        dist = load_instance(spec.instance_path)
        if spec.grid is None:
            raise DistributionError("instance files need an explicit grid")
        return dist, spec.grid
    params = dict(spec.params or {})
    n = int(params.get("n", 4))
    eps = as_fraction(params.get("eps", spec.eps))
    rng = np.random.default_rng([spec.master_seed])
    family = spec.family
    if family == "base-g":
        dist, grid = iid_product(base_g(n), n), (HALF, Fraction(1))
    elif family == "sample-hard":
        dist, grid = sample_hard_instance(n, eps, rng).dist, (HALF, Fraction(1))
    elif family == "query-hard":
        dist, grid = query_hard_instance(n, eps, rng).dist, equal_revenue_grid(eps)
    elif family == "equal-revenue":
        dist, grid = iid_product(equal_revenue_dist(n, eps), n), equal_revenue_grid(eps)
    elif family == "nonmono":
        plain, dominating = nonmonotonicity_example()
        variant = params.get("variant", "plain")
        dist, grid = (
            dominating if variant == "dominating" else plain
        ), (HALF, Fraction(1))
    elif family == "random":
        dist = random_instance(
            rng,
            n,
            lattice=int(params.get("lattice", 8)),
            max_support=int(params.get("max_support", 4)),
        )
        grid = tuple(
            Fraction(t, dist.lattice) for t in range(dist.lattice + 1)
        )
    else:
        raise DistributionError(f"unknown family {family!r}")
    return dist, (spec.grid or grid)


def thread_count() -> int:
    raw = os.environ.get("BUPP_THREADS", "1")
    try:
        count = int(raw)
    except ValueError as exc:
        raise DistributionError(f"BUPP_THREADS must be an integer, got {raw!r}") from exc
    return max(1, count)


def _run_trial(payload: tuple) -> ExperimentRecord:
    (instance_data, grid_raw, optimum_raw, learner, eps_s, delta_s, c,
     optimizer, master_seed, budget, trial, timing) = payload
    dist = instance_from_dict(instance_data)
    grid = tuple(Fraction(num, den) for num, den in grid_raw)
    optimum = Fraction(*optimum_raw)
    cfg = LearnerConfig(
        Fraction(eps_s), Fraction(delta_s), c=c, budget_override=budget
    )
    rng = np.random.default_rng([master_seed, budget, trial])
    if optimizer == "coord":
        opt = lambda pd: coordinate_ascent(pd, grid, starts=8, rng=rng)
    else:
        opt = lambda pd: optimal_bruteforce(pd, grid)
    started = time.perf_counter()
    if learner == "sample":
        oracle = SampleOracle(dist, rng)
        prices = learn_from_samples(oracle, cfg, optimizer=opt)
        queries, samples = 0, oracle.samples_drawn
    else:
        oracle = QueryOracle(dist, rng)
        prices = learn_product_by_queries(oracle, cfg, optimizer=opt)
        queries, samples = oracle.total_queries, 0
    elapsed_ms = (time.perf_counter() - started) * 1000.0 if timing else 0.0
    loss = optimum - rev(dist, prices)  # exact, then one float conversion
    return ExperimentRecord(
        budget, trial, float(loss), queries, samples, elapsed_ms
    )


def run_experiment(spec: ExperimentSpec) -> list[ExperimentRecord]:
    dist, grid = build_instance(spec)
    _, optimum = optimal_bruteforce(dist, grid)
    instance_data = instance_to_dict(dist)
    grid_raw = tuple((g.numerator, g.denominator) for g in grid)
    payloads = [
        (
            instance_data,
            grid_raw,
            (optimum.numerator, optimum.denominator),
            spec.learner,
            str(spec.eps),
            str(spec.delta),
            spec.c,
            spec.optimizer,
            spec.master_seed,
            budget,
            trial,
            spec.timing,
        )
        for budget in spec.budgets
        for trial in range(spec.trials)
    ]
    workers = thread_count()
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=get_context("fork")
        ) as pool:
            records = list(pool.map(_run_trial, payloads))
    else:
        records = [_run_trial(p) for p in payloads]
    records.sort(key=lambda r: (r.budget, r.trial))
    return records


def export_csv(records: list[ExperimentRecord], path: str | Path) -> None:
    lines = [CSV_COLUMNS]
    for r in records:
        lines.append(
            f"{r.budget},{r.trial},{r.revenue_loss:.12g},"
            f"{r.queries_used},{r.samples_used},{r.wall_time_ms:.12g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> list[ExperimentRecord]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != CSV_COLUMNS:
        raise DistributionError(f"unrecognized experiment CSV header in {path}")
    records = []
    for line in lines[1:]:
        budget, trial, loss, queries, samples, wall = line.split(",")
        records.append(
            ExperimentRecord(
                int(budget), int(trial), float(loss),
                int(queries), int(samples), float(wall),
            )
        )
    return records


def write_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def misidentification_rate(
    n: int,
    eps: Fraction,
    samples: int,
    trials: int,
    master_seed: int,
) -> float:
    """Fraction of hidden pair orientations the likelihood test gets wrong.

    Fresh sample-hard instance and fresh samples per trial; the rate is
    pooled over all pairs of all trials.
    """
    wrong = total = 0
    for trial in range(trials):
        rng = np.random.default_rng([master_seed, trial])
        inst = sample_hard_instance(n, eps, rng)
        oracle = SampleOracle(inst.dist, rng)
        counts = oracle.draw_counts(samples)
        guesses = identify_perturbed(inst, counts, rng)
        for guess, (_, _, truth) in zip(guesses, inst.pairing):
            wrong += guess != truth
            total += 1
    return wrong / total
