"""Acceptance gate: one test per published claim, at its stated tolerance.

Each test prints a single ``criterion N: PASS/FAIL`` line.  Two criteria are
expected to fail and are left failing on purpose; the analysis of why the
published numbers cannot be reproduced from the stated models is recorded in
the project decision log.
"""

import math
import random
from fractions import Fraction

import pytest

from conftest import FIXTURES
from goldens import (
    REFERENCE_MIN_STEP,
    REFERENCE_PER_STEP_EXPERIMENTAL,
    REFERENCE_PER_STEP_UNIFORM,
)
from blicket.core import (
    OverhypothesisKind,
    activates,
    enumerate_structures,
    experimental_prior,
    uniform_prior,
)
from blicket.env import MacroAction, Observation
from blicket.inference import (
    BeliefState,
    ImpossibleObservationError,
    TestOutcomePair as OutcomePair,
    expected_info_gain,
    info_gain,
    per_step_policy,
    posterior_update,
    predictive_probability,
)
from blicket.planner import brute_force_min, expected_steps, min_step_policy
from blicket.traces import (
    condition_stats,
    count_checks,
    disambiguation_sufficient,
    read_traces,
    unique_combinations,
)
from blicket.tree import ActionNode, Leaf, isomorphic_under_relabeling, iter_paths

ON = Observation.DETECTOR_ON


def report(n: int, ok: bool, detail: str) -> None:
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, detail


def all_trees():
    space = enumerate_structures(3)
    u, e = uniform_prior(space), experimental_prior(space)
    return {
        ("per-step", "uniform"): (per_step_policy(BeliefState.from_prior(u)), u),
        ("per-step", "experimental"): (per_step_policy(BeliefState.from_prior(e)), e),
        ("min-step", "uniform"): (min_step_policy(u).tree, u),
        ("min-step", "experimental"): (min_step_policy(e).tree, e),
    }


def test_criterion_1_enumeration():
    space = enumerate_structures(3)
    kinds = [h.kind for h in space]
    ok = (
        len(space) == 11
        and kinds.count(OverhypothesisKind.DISJUNCTIVE) == 7
        and kinds.count(OverhypothesisKind.CONJUNCTIVE) == 4
        and all(
            len(h.blickets) >= 2
            for h in space
            if h.kind is OverhypothesisKind.CONJUNCTIVE
        )
    )
    report(1, ok, f"{len(space)} structures, no conjunctive singletons")


def test_criterion_2_expected_steps():
    space = enumerate_structures(3)
    u, e = uniform_prior(space), experimental_prior(space)
    values = {
        ("min-step", "uniform", 3.55): float(min_step_policy(u).expected_steps),
        ("min-step", "experimental", 3.50): float(min_step_policy(e).expected_steps),
        ("per-step", "uniform", 3.72): float(
            expected_steps(per_step_policy(BeliefState.from_prior(u)), u)
        ),
        ("per-step", "experimental", 4.00): float(
            expected_steps(per_step_policy(BeliefState.from_prior(e)), e)
        ),
    }
    failures = [
        f"{model}/{prior}: got {got:.4f}, target {target}"
        for (model, prior, target), got in values.items()
        if abs(got - target) > 0.01
    ]
    detail = "; ".join(
        f"{m}/{p}={got:.2f} (target {t})" for (m, p, t), got in values.items()
    )
    report(2, not failures, detail + (" — see decision log" if failures else ""))


def test_criterion_3_golden_tree_isomorphism():
    trees = all_trees()
    references = {
        ("per-step", "uniform"): REFERENCE_PER_STEP_UNIFORM,
        ("per-step", "experimental"): REFERENCE_PER_STEP_EXPERIMENTAL,
        ("min-step", "uniform"): REFERENCE_MIN_STEP,
        ("min-step", "experimental"): REFERENCE_MIN_STEP,
    }
    results = {
        key: isomorphic_under_relabeling(trees[key][0], ref, 3)
        for key, ref in references.items()
    }
    failures = [f"{m}/{p}" for (m, p), perm in results.items() if perm is None]
    detail = ", ".join(
        f"{m}/{p}: {'iso ' + str(perm) if perm else 'no relabeling matches'}"
        for (m, p), perm in results.items()
    )
    report(3, not failures, detail + (" — see decision log" if failures else ""))


def test_criterion_4_oracle_equivalence():
    cases = []
    for n in (2, 3):
        space = enumerate_structures(n)
        cases.append(("uniform", uniform_prior(space)))
        if n == 3:
            cases.append(("experimental", experimental_prior(space)))
    ok = True
    parts = []
    for name, prior in cases:
        planner = min_step_policy(prior).expected_steps
        oracle = brute_force_min(prior)
        greedy = expected_steps(per_step_policy(BeliefState.from_prior(prior)), prior)
        exact = planner == oracle
        dominated = greedy >= planner
        ok = ok and exact and dominated
        parts.append(
            f"n={len(prior.space.hypotheses)}/{name}: planner={planner}"
            f"=oracle:{exact}, greedy {greedy}>=min:{dominated}"
        )
    report(4, ok, "; ".join(parts))


def test_criterion_5_inference_properties():
    space = enumerate_structures(3)
    prior = uniform_prior(space)
    rng = random.Random(11)
    combos = [frozenset(i for i in range(3) if m >> i & 1) for m in range(8)]

    belief = BeliefState.from_prior(prior)
    updates = 0
    normalized = True
    while updates < 10_000:
        action = MacroAction(rng.choice(combos))
        p_on = predictive_probability(belief, action)
        obs = ON if rng.random() < float(p_on) else Observation.DETECTOR_OFF
        try:
            belief = posterior_update(belief, OutcomePair(action, obs))
        except ImpossibleObservationError:
            continue
        updates += 1
        if abs(float(sum(belief.weights)) - 1.0) > 1e-12:
            normalized = False
        if len(belief.support()) == 1:
            belief = BeliefState.from_prior(prior)

    start = BeliefState.from_prior(prior)
    eig_full = expected_info_gain(start, MacroAction(frozenset({0, 1, 2})))
    eig_empty = expected_info_gain(start, MacroAction(frozenset()))

    chain_ok = True
    for (model, prior_name), (tree, p) in all_trees().items():
        for path, identified in iter_paths(tree):
            w = p.weight(identified)
            if w == 0:
                continue
            bel = BeliefState.from_prior(p)
            total = 0.0
            for c, o in path:
                t = OutcomePair(MacroAction(c), o)
                total += info_gain(bel, t)
                bel = posterior_update(bel, t)
            if abs(total - (-math.log2(float(w)))) > 1e-9:
                chain_ok = False

    ok = normalized and eig_full == 0.0 and eig_empty == 0.0 and chain_ok
    report(
        5,
        ok,
        f"10k updates normalized: {normalized}; EIG(ABC)={eig_full}, "
        f"EIG(empty)={eig_empty}; chain identity on all trees: {chain_ok}",
    )


def test_criterion_6_trace_analytics():
    traces = read_traces(FIXTURES / "corpus.jsonl")
    for t in traces:
        t.replay()
    by_id = {t.session_id: t for t in traces}
    dedup_ok = count_checks(by_id["fx-1"]) == 3  # run of 2 collapsed, re-arm counted
    order_free_ok = unique_combinations(by_id["fx-3"]) == 2  # {B,C} twice, 2 orders
    bound_ok = all(unique_combinations(t) <= count_checks(t) for t in traces)
    stats = {s.condition.label: s for s in condition_stats(traces)}
    cg = stats["conjunctive/not-given"]
    table_ok = (
        (cg.checks_mean, cg.checks_sd) == (2.0, 1.0)
        and (cg.time_mean_s, cg.time_sd_s) == (2.5, 0.5)
        and f"{cg.checks_mean:.2f} ({cg.checks_sd:.2f})" == "2.00 (1.00)"
    )
    ok = dedup_ok and order_free_ok and bound_ok and table_ok
    report(
        6,
        ok,
        f"dedup rule: {dedup_ok}; order-free combos: {order_free_ok}; "
        f"unique<=checks: {bound_ok}; hand-computed table: {table_ok}",
    )


def test_criterion_7_sufficiency(uniform11):
    from conftest import make_trace

    checked = 0
    ok = True
    for prior_name in ("uniform", "experimental"):
        space = enumerate_structures(3)
        prior = uniform_prior(space) if prior_name == "uniform" else experimental_prior(space)
        tree = min_step_policy(prior).tree
        for path, identified in iter_paths(tree):
            checks = [(set(c), o is ON) for c, o in path]
            full = make_trace(identified.name, checks)
            full.replay()
            truncated = make_trace(identified.name, checks[:-1])
            if not disambiguation_sufficient(full, uniform11):
                ok = False
            if disambiguation_sufficient(truncated, uniform11):
                ok = False
            checked += 1
    report(7, ok, f"{checked} leaves: full walks sufficient, truncations not")


def test_criterion_8_service_round_trip(tmp_path):
    import asyncio
    import json

    from blicket.service import SessionService

    async def go():
        svc = SessionService(tmp_path / "traces.jsonl")
        created = await svc.handle_message(
            {
                "type": "create_session",
                "condition": {"kind": "conjunctive", "given": True},
                "ground_truth": "AC-con",
            }
        )
        sid = created["session_id"]
        pre_finish = [created]
        for ev in (
            {"kind": "place", "object": "A"},
            {"kind": "check"},
            {"kind": "place", "object": "B"},
            {"kind": "check"},
            {"kind": "place", "object": "C"},
            {"kind": "check"},
        ):
            pre_finish.append(
                await svc.handle_message(
                    {"type": "event", "session_id": sid, "event": ev}
                )
            )
        await svc.handle_message(
            {
                "type": "finish",
                "session_id": sid,
                "answers": {"blickets": {"A": True, "B": True, "C": False}},
            }
        )
        return svc, pre_finish

    svc, pre_finish = asyncio.run(go())
    leak_free = all(
        "AC-con" not in json.dumps(m) and "ground_truth" not in json.dumps(m)
        for m in pre_finish
    )
    traces = read_traces(svc.trace_path)
    replay_ok = True
    try:
        traces[0].replay()
    except Exception:
        replay_ok = False
    outcomes = [o.lit for _, o in traces[0].checked_combinations()]
    expected = [
        activates(traces[0].ground_truth, c)
        for c, _ in traces[0].checked_combinations()
    ]
    ok = leak_free and replay_ok and outcomes == expected and len(traces) == 1
    report(
        8,
        ok,
        f"persisted trace replays: {replay_ok}; outcomes bit-exact: "
        f"{outcomes == expected}; no pre-finish truth leak: {leak_free}",
    )
