"""Command-line entry points: solve, simulate, analyze, serve."""

from __future__ import annotations

import asyncio
import glob as globmod
import os
import sys
from fractions import Fraction

import click

from .core import (
    HypothesisSpace,
    Prior,
    enumerate_structures,
    experimental_prior,
    parse_structure,
    uniform_prior,
)
from .env import reset, run_macro
from .inference import IndistinguishableHypothesesError, per_step_policy, BeliefState
from .planner import expected_steps, min_step_policy
from .service import DEFAULT_SESSION_CAP_S, run_service
from .tree import ActionNode, Leaf, format_text, to_dot
from .traces import (
    TraceValidationError,
    UndefinedRateError,
    blicket_rates,
    condition_stats,
    disambiguation_sufficient,
    empty_check,
    format_stats_table,
    order_variation,
    read_traces,
)

DATA_DIR_ENV = "BLICKET_DATA_DIR"


def _parse_space(spec: str) -> HypothesisSpace:
    """``full:N`` for every structure over N objects, or a comma-separated
    list of structure names like ``A-dis,AB-con``."""
    if spec.startswith("full:"):
        return enumerate_structures(int(spec.split(":", 1)[1]))
    hyps = tuple(parse_structure(s.strip()) for s in spec.split(","))
    n = max(max(h.blickets) for h in hyps) + 1
    return HypothesisSpace(max(n, 2), hyps)


def _make_prior(space: HypothesisSpace, name: str) -> Prior:
    if name == "uniform":
        return uniform_prior(space)
    return experimental_prior(space)


def _build(model: str, prior: Prior):
    """(tree, expected_steps) for either planning model."""
    if model == "min-step":
        result = min_step_policy(prior)
        return result.tree, result.expected_steps
    tree = per_step_policy(BeliefState.from_prior(prior))
    steps = expected_steps(tree, prior) if tree is not None else Fraction(0)
    return tree, steps


@click.group()
def main() -> None:
    """Causal-structure planning and analysis for the blicket detector."""


@main.command()
@click.option("--space", default="full:3", show_default=True,
              help="full:N or comma-separated structure names")
@click.option("--prior", "prior_name", default="uniform", show_default=True,
              type=click.Choice(["uniform", "experimental"]))
@click.option("--model", default="min-step", show_default=True,
              type=click.Choice(["per-step", "min-step"]))
@click.option("--export", default="text", show_default=True,
              type=click.Choice(["text", "dot"]))
def solve(space: str, prior_name: str, model: str, export: str) -> None:
    """Plan a policy tree and report its expected number of checks."""
    sp = _parse_space(space)
    prior = _make_prior(sp, prior_name)
    try:
        tree, steps = _build(model, prior)
    except IndistinguishableHypothesesError as exc:
        raise click.ClickException(
            f"indistinguishable hypotheses: {exc.pair[0].name} vs {exc.pair[1].name}"
        )
    if tree is None:
        click.echo("(empty tree)")
    elif export == "dot":
        click.echo(to_dot(tree))
    else:
        click.echo(format_text(tree))
    click.echo(f"expected steps: {float(steps):.2f}")


def _steps_to_identify(tree, truth) -> int:
    state = reset(truth)
    steps = 0
    node = tree
    while isinstance(node, ActionNode):
        state, obs = run_macro(state, node.action)
        steps += 1
        node = node.branches[obs]
    assert isinstance(node, Leaf)
    if node.identified != truth:
        raise click.ClickException(
            f"policy identified {node.identified.name} under truth {truth.name}"
        )
    return steps


@main.command()
@click.option("--space", default="full:3", show_default=True)
@click.option("--prior", "prior_name", default="uniform", show_default=True,
              type=click.Choice(["uniform", "experimental"]))
@click.option("--model", default="min-step", show_default=True,
              type=click.Choice(["per-step", "min-step"]))
@click.option("--truth", default="all", show_default=True,
              help="structure name, or 'all' for every truth in the prior support")
@click.option("--trials", default=1, show_default=True,
              help="deterministic policies collapse repeated trials to one")
def simulate(space: str, prior_name: str, model: str, truth: str, trials: int) -> None:
    """Run the policy against the environment and count checks per truth."""
    del trials
    sp = _parse_space(space)
    prior = _make_prior(sp, prior_name)
    support = prior.support()
    if truth == "all":
        truths = support
    else:
        t = parse_structure(truth)
        if t not in support:
            raise click.ClickException(f"truth {t.name} is outside the prior support")
        truths = [t]
    if len(support) == 1:
        for t in truths:
            click.echo(f"{t.name}: 0 steps")
        click.echo("prior-weighted mean: 0.00")
        return
    tree, _ = _build(model, prior)
    total = Fraction(0)
    for t in truths:
        steps = _steps_to_identify(tree, t)
        click.echo(f"{t.name}: {steps} steps")
        total += prior.weight(t) * steps
    if truth == "all":
        click.echo(f"prior-weighted mean: {float(total):.2f}")


@main.command()
@click.option("--traces", "patterns", multiple=True, required=True,
              help="trace file or glob; may repeat")
def analyze(patterns: tuple[str, ...]) -> None:
    """Validate traces and report exploration statistics."""
    paths = sorted({p for pat in patterns for p in globmod.glob(pat)})
    traces = []
    skipped = 0
    for path in paths:
        try:
            batch = read_traces(path)
            for t in batch:
                t.replay()
            traces.extend(batch)
        except (TraceValidationError, KeyError, ValueError) as exc:
            skipped += 1
            click.echo(f"skipping {path}: {exc}", err=True)
    if not traces:
        click.echo("no valid traces")
        return
    click.echo(format_stats_table(condition_stats(traces)))

    space = enumerate_structures(3)
    for name, prior in (
        ("uniform-11", uniform_prior(space)),
        ("experimental-6", experimental_prior(space)),
    ):
        ok = 0
        applicable = 0
        for t in traces:
            try:
                suff = disambiguation_sufficient(t, prior)
            except TraceValidationError:
                continue  # truth outside this prior's support
            applicable += 1
            ok += suff
        if applicable:
            click.echo(
                f"sufficient to disambiguate ({name}): "
                f"{100 * ok / applicable:.0f}% ({ok}/{applicable})"
            )
        else:
            click.echo(f"sufficient to disambiguate ({name}): n/a")

    try:
        tpr, fpr = blicket_rates(traces)
        click.echo(f"blicket judgments: TPR {tpr:.2f}, FPR {fpr:.2f}")
    except UndefinedRateError:
        click.echo("blicket judgments: none recorded")
    n = len(traces)
    orders = sum(order_variation(t) for t in traces)
    empties = sum(empty_check(t) for t in traces)
    click.echo(f"order variation: {orders}/{n}; empty-detector checks: {empties}/{n}")
    if skipped:
        click.echo(f"skipped {skipped} invalid file(s)", err=True)


@main.command()
@click.option("--port", default=8765, show_default=True, help="TCP wire-protocol port")
@click.option("--http-port", default=None, type=int,
              help="optional read-only HTTP port (health, trace download)")
@click.option("--traces", "trace_file", default=None,
              help="JSON Lines output file (default: <data dir>/traces.jsonl)")
@click.option("--session-cap-s", default=DEFAULT_SESSION_CAP_S, show_default=True,
              help="seconds before a session auto-finishes")
def serve(port: int, http_port: int | None, trace_file: str | None,
          session_cap_s: float) -> None:
    """Host the live-session wire protocol."""
    if trace_file is None:
        data_dir = os.environ.get(DATA_DIR_ENV, ".")
        trace_file = os.path.join(data_dir, "traces.jsonl")
    click.echo(f"serving on tcp 127.0.0.1:{port}, traces -> {trace_file}")
    try:
        asyncio.run(run_service(trace_file, port, http_port, session_cap_s))
    except KeyboardInterrupt:
        sys.exit(0)


if __name__ == "__main__":
    main()
