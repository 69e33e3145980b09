"""Command line front end.

Exit codes: 0 on success, 1 when a verification check fails, 2 for usage
errors (click's default).  All randomness is seeded; repeated invocations
with the same arguments produce identical output.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import experiment as exp
from . import instances as inst
from . import verify as ver
from .dist import DistributionError, LatticeError, iid_product, instance_to_dict
from .learn import LearnerConfig, QueryOracle, SampleOracle, learn_from_samples, learn_product_by_queries
from .optimize import coordinate_ascent, grid_from_eps, optimal_bruteforce
from .revenue import exante_rev, rev

FAMILIES = ("base-g", "sample-hard", "query-hard", "equal-revenue", "nonmono", "random")


def _fraction(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(f"bad {what}: {text!r}") from exc


def _parse_prices(text: str) -> tuple[Fraction, ...]:
    return tuple(_fraction(tok.strip(), "price") for tok in text.split(","))


def _load(path: str, with_hidden: bool = False):
    try:
        return inst.load_instance(path, with_hidden=with_hidden)
    except (OSError, json.JSONDecodeError, DistributionError, LatticeError, KeyError, ValueError) as exc:
        raise click.UsageError(f"cannot load instance {path}: {exc}") from exc


@click.group()
def main():
    """Posted-price learning toolkit for a unit-demand buyer."""


@main.command()
@click.option("--family", type=click.Choice(FAMILIES), required=True)
@click.option("--n", type=int, default=None, help="number of items")
@click.option("--eps", default=None, help="family resolution, e.g. 1/32")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--lattice", type=int, default=8, help="random family: value grid")
@click.option("--max-support", type=int, default=4, help="random family: support cap")
@click.option(
    "--variant",
    type=click.Choice(["plain", "dominating"]),
    default="plain",
    help="nonmono family: which of the two products",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="default stdout")
def gen(family, n, eps, seed, lattice, max_support, variant, out):
    """Generate an instance file (hidden scoring data included)."""
    rng = np.random.default_rng([seed])
    hidden = None
    try:
        if family == "nonmono":
            plain, dominating = inst.nonmonotonicity_example()
            dist = dominating if variant == "dominating" else plain
        elif n is None:
            raise click.UsageError(f"--n is required for family {family}")
        elif family == "base-g":
            dist = iid_product(inst.base_g(n), n)
        elif family == "random":
            dist = inst.random_instance(rng, n, lattice=lattice, max_support=max_support)
        else:
            if eps is None:
                raise click.UsageError(f"--eps is required for family {family}")
            eps_f = _fraction(eps, "eps")
            if family == "sample-hard":
                bundle = inst.sample_hard_instance(n, eps_f, rng)
            elif family == "query-hard":
                bundle = inst.query_hard_instance(n, eps_f, rng)
            else:  # equal-revenue
                dist = iid_product(inst.equal_revenue_dist(n, eps_f), n)
                bundle = None
            if family in ("sample-hard", "query-hard"):
                dist = bundle.dist
                hidden = inst.hidden_block(bundle)
    except (DistributionError, LatticeError) as exc:
        raise click.UsageError(str(exc)) from exc
    payload = instance_to_dict(dist)
    if hidden is not None:
        payload["hidden"] = hidden
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command("eval")
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--prices", required=True, help="comma separated, e.g. 1/2,1")
def eval_cmd(instance_path, prices):
    """Exact revenue and ex-ante relaxation value at given prices."""
    dist = _load(instance_path)
    p = _parse_prices(prices)
    try:
        r = rev(dist, p)
        x = exante_rev(dist, p)
    except (DistributionError, LatticeError) as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(f"revenue {r} ({float(r):.12g})")
    click.echo(f"exante  {x} ({float(x):.12g})")


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--grid", default=None, help="comma separated prices; default eps^2 grid")
@click.option("--eps", default=None, help="grid resolution when --grid is omitted")
@click.option("--method", type=click.Choice(["brute", "coord"]), default="brute", show_default=True)
@click.option("--starts", type=int, default=8, show_default=True, help="coord restarts")
@click.option("--seed", type=int, default=0, show_default=True)
def opt(instance_path, grid, eps, method, starts, seed):
    """Optimal grid prices for a known instance."""
    dist = _load(instance_path)
    if grid:
        g = _parse_prices(grid)
    elif eps:
        g = grid_from_eps(_fraction(eps, "eps"))
    else:
        raise click.UsageError("give --grid or --eps")
    try:
        if method == "brute":
            p, r = optimal_bruteforce(dist, g)
        else:
            p, r = coordinate_ascent(dist, g, starts, np.random.default_rng([seed]))
    except (DistributionError, LatticeError) as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo("prices " + ",".join(str(x) for x in p))
    click.echo(f"revenue {r} ({float(r):.12g})")


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["sample", "query"]), required=True)
@click.option("--budget", type=int, default=None, help="samples, or queries per threshold")
@click.option("--eps", required=True)
@click.option("--delta", default="1/10", show_default=True)
@click.option("--c", type=float, default=None, help="concentration constant override")
@click.option("--grid", default=None, help="optimizer grid; default eps^2 grid")
@click.option("--seed", type=int, default=0, show_default=True)
def learn(instance_path, mode, budget, eps, delta, c, grid, seed):
    """Run a learner against an instance file (hidden block is ignored)."""
    dist = _load(instance_path)  # never passes with_hidden here
    eps_f = _fraction(eps, "eps")
    try:
        cfg = LearnerConfig(eps_f, _fraction(delta, "delta"), c=c, budget_override=budget)
        g = _parse_prices(grid) if grid else grid_from_eps(eps_f)
        optimizer = lambda pd: optimal_bruteforce(pd, g)
        rng = np.random.default_rng([seed])
        if mode == "sample":
            oracle = SampleOracle(dist, rng)
            prices = learn_from_samples(oracle, cfg, optimizer=optimizer)
            used = f"samples_used {oracle.samples_drawn}"
        else:
            oracle = QueryOracle(dist, rng)
            prices = learn_product_by_queries(oracle, cfg, optimizer=optimizer)
            used = f"queries_used {oracle.total_queries}"
    except (DistributionError, LatticeError) as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo("prices " + ",".join(str(x) for x in prices))
    click.echo(used)
    click.echo(f"revenue {rev(dist, prices)} ({float(rev(dist, prices)):.12g})")


@main.command("experiment")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--figures-dir", type=click.Path(file_okay=False), default=None)
def experiment_cmd(spec_path, out, figures_dir):
    """Run a budget sweep and write the records as CSV."""
    try:
        data = json.loads(Path(spec_path).read_text())
        spec = exp.ExperimentSpec.from_json_dict(data)
    except (OSError, json.JSONDecodeError, KeyError, DistributionError, ValueError) as exc:
        raise click.UsageError(f"bad experiment spec {spec_path}: {exc}") from exc
    try:
        records = exp.run_experiment(spec)
    except (DistributionError, LatticeError) as exc:
        raise click.UsageError(str(exc)) from exc
    exp.export_csv(records, out)
    click.echo(f"wrote {len(records)} records to {out}", err=True)
    if figures_dir:
        from .plots import render_report

        for path in render_report(records, figures_dir):
            click.echo(f"wrote {path}", err=True)


@main.command()
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def report(csv_path, out_dir):
    """Render figures from an existing experiment CSV."""
    try:
        records = exp.read_csv(csv_path)
    except DistributionError as exc:
        raise click.UsageError(str(exc)) from exc
    from .plots import render_report

    for path in render_report(records, out_dir):
        click.echo(f"wrote {path}")


def _coerce_param(text: str):
    for parse in (int, Fraction, float):
        try:
            return parse(text)
        except ValueError:
            continue
    return text


@main.command()
@click.option("--lemma", required=True, type=click.Choice(sorted(ver.VERIFIERS)))
@click.option(
    "--param",
    "-p",
    "params",
    multiple=True,
    help="key=value overrides, e.g. -p trials=50 -p eps=1/16",
)
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None)
def verify(lemma, params, json_out):
    """Check one of the coded inequalities numerically; exit 1 on failure."""
    kwargs = {}
    for item in params:
        if "=" not in item:
            raise click.UsageError(f"expected key=value, got {item!r}")
        key, _, value = item.partition("=")
        kwargs[key.strip()] = _coerce_param(value.strip())
    try:
        result = ver.verify_lemma(lemma, **kwargs)
    except (TypeError, KeyError, DistributionError, LatticeError) as exc:
        raise click.UsageError(str(exc)) from exc
    status = "PASS" if result.passed else "FAIL"
    click.echo(
        f"{status} {result.name}: cases={result.cases} failures={result.failures} "
        f"worst_margin={result.worst_margin:.6g} bound={result.bound:.6g}"
    )
    for key, value in result.details.items():
        click.echo(f"  {key}: {value}")
    if json_out:
        exp.write_json(result.to_json_dict(), json_out)
    if not result.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
