"""Session traces and the behavioral analytics used to describe exploration.

A trace is the event log of one session (human or agent): timestamped place,
remove, and check events plus demonstration, question, and answer records,
with the condition assignment and the hidden ground truth.  Analytics follow
the experiment's counting rules: consecutive checks with no intervening
placement change collapse to one, combinations are compared as sets, and
sufficiency asks whether an optimal Bayesian observer could have identified
the ground truth from the recorded evidence.

Traces are stored as JSON Lines, one session per line, schema version 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    CausalStructure,
    Combination,
    HypothesisSpace,
    OverhypothesisKind,
    Prior,
    object_index,
    object_label,
    parse_structure,
)
from .env import EnvAction, MacroAction, Observation, check, place, remove, reset, step
from .inference import BeliefState, TestOutcomePair, posterior_update

TRACE_SCHEMA_VERSION = 1


class TraceValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Condition:
    """Cell of the 2x2 design: machine kind x hypothesis-given."""

    structure_kind: OverhypothesisKind
    hypothesis_given: bool

    @property
    def label(self) -> str:
        given = "given" if self.hypothesis_given else "not-given"
        return f"{self.structure_kind.value}/{given}"


@dataclass(frozen=True)
class TraceEvent:
    PLACE = "place"
    REMOVE = "remove"
    CHECK = "check"
    DEMO = "demo"
    QUESTION = "question"
    ANSWER = "answer"

    t_ms: int
    kind: str
    obj: int | None = None
    outcome: Observation | None = None
    ref_id: str | None = None
    payload: object = None

    def __post_init__(self) -> None:
        if self.kind in (self.PLACE, self.REMOVE) and self.obj is None:
            raise ValueError(f"{self.kind} event needs an object")
        if self.kind == self.CHECK and self.outcome is None:
            raise ValueError("check event must record the detector outcome")


@dataclass
class SessionTrace:
    session_id: str
    condition: Condition
    ground_truth: CausalStructure
    events: list[TraceEvent] = field(default_factory=list)
    blicket_judgments: dict[int, bool] | None = None
    final_combination: Combination | None = None
    free_answer: str | None = None

    def __post_init__(self) -> None:
        last = -1
        for ev in self.events:
            if ev.t_ms < last:
                raise TraceValidationError("event times must be nondecreasing")
            last = ev.t_ms

    # -- replay ------------------------------------------------------------

    def replay(self) -> None:
        """Re-run place/remove/check through the environment and require every
        recorded check outcome to match the ground truth's semantics."""
        state = reset(self.ground_truth)
        for i, ev in enumerate(self.events):
            if ev.kind == TraceEvent.PLACE:
                state, _ = step(state, place(ev.obj))
            elif ev.kind == TraceEvent.REMOVE:
                state, _ = step(state, remove(ev.obj))
            elif ev.kind == TraceEvent.CHECK:
                state, obs = step(state, check())
                if obs != ev.outcome:
                    raise TraceValidationError(
                        f"event {i}: recorded {ev.outcome.value} but replay "
                        f"gives {obs.value} for {sorted(state.combination())}"
                    )

    # -- counting ----------------------------------------------------------

    def deduplicated_checks(self) -> list[TraceEvent]:
        """Check events after collapsing consecutive-check runs: only the
        first check of a run counts; any place or remove re-arms counting,
        including removing an object and putting it straight back."""
        out: list[TraceEvent] = []
        armed = True
        for ev in self.events:
            if ev.kind in (TraceEvent.PLACE, TraceEvent.REMOVE):
                armed = True
            elif ev.kind == TraceEvent.CHECK:
                if armed:
                    out.append(ev)
                armed = False
        return out

    def checked_combinations(self) -> list[tuple[Combination, Observation]]:
        """(set, outcome) at each deduplicated check, in order."""
        on: list[int] = []
        result = []
        armed = True
        for ev in self.events:
            if ev.kind == TraceEvent.PLACE:
                if ev.obj not in on:
                    on.append(ev.obj)
                armed = True
            elif ev.kind == TraceEvent.REMOVE:
                if ev.obj in on:
                    on.remove(ev.obj)
                armed = True
            elif ev.kind == TraceEvent.CHECK:
                if armed:
                    result.append((frozenset(on), ev.outcome))
                armed = False
        return result

    def micro_action_count(self) -> int:
        """Raw count of place/remove/check events, no deduplication."""
        return sum(
            1 for ev in self.events
            if ev.kind in (TraceEvent.PLACE, TraceEvent.REMOVE, TraceEvent.CHECK)
        )

    def total_time_s(self) -> float:
        times = [ev.t_ms for ev in self.events]
        return (max(times) - min(times)) / 1000.0 if times else 0.0


def count_checks(trace: SessionTrace) -> int:
    return len(trace.deduplicated_checks())


def unique_combinations(trace: SessionTrace) -> int:
    """Distinct object sets among deduplicated checks; order-free, and the
    empty set counts if it was checked."""
    return len({c for c, _ in trace.checked_combinations()})


def time_to_first_success(trace: SessionTrace) -> float | None:
    """Seconds until the first check that lit the detector, or None."""
    for ev in trace.events:
        if ev.kind == TraceEvent.CHECK and ev.outcome.lit:
            return ev.t_ms / 1000.0
    return None


def disambiguation_sufficient(trace: SessionTrace, prior: Prior) -> bool:
    """Whether an optimal Bayesian observer starting from ``prior`` would be
    left with a single hypothesis after the trace's deduplicated evidence."""
    belief = BeliefState.from_prior(prior)
    for i, (combo, obs) in enumerate(trace.checked_combinations()):
        try:
            belief = posterior_update(belief, TestOutcomePair(MacroAction(combo), obs))
        except Exception as exc:
            raise TraceValidationError(f"check {i} is inconsistent with the prior: {exc}")
    return len(belief.support()) == 1


def order_variation(trace: SessionTrace) -> bool:
    """True when some set of objects was checked in two different placement
    orders."""
    orders: dict[Combination, set[tuple]] = {}
    on: list[int] = []
    armed = True
    for ev in trace.events:
        if ev.kind == TraceEvent.PLACE:
            if ev.obj not in on:
                on.append(ev.obj)
            armed = True
        elif ev.kind == TraceEvent.REMOVE:
            if ev.obj in on:
                on.remove(ev.obj)
            armed = True
        elif ev.kind == TraceEvent.CHECK:
            if armed:
                orders.setdefault(frozenset(on), set()).add(tuple(on))
            armed = False
    return any(len(seen) >= 2 for seen in orders.values())


def empty_check(trace: SessionTrace) -> bool:
    """True when the check mark was pressed with nothing on the detector."""
    return any(c == frozenset() for c, _ in trace.checked_combinations())


class UndefinedRateError(ValueError):
    """No blicket judgments available."""


def blicket_rates(traces: Sequence[SessionTrace]) -> tuple[float, float]:
    """Pooled true/false positive rates of blicket judgments.

    TPR: P(judged blicket | object is a blicket); FPR: P(judged blicket |
    object is not), pooled over objects and traces.
    """
    tp = fp = pos = neg = 0
    for t in traces:
        if t.blicket_judgments is None:
            continue
        for obj, judged in t.blicket_judgments.items():
            if obj in t.ground_truth.blickets:
                pos += 1
                tp += judged
            else:
                neg += 1
                fp += judged
    if pos == 0 and neg == 0:
        raise UndefinedRateError("no blicket judgments in the given traces")
    tpr = tp / pos if pos else float("nan")
    fpr = fp / neg if neg else float("nan")
    return tpr, fpr


# -- condition-level statistics -------------------------------------------


@dataclass(frozen=True)
class ConditionStats:
    condition: Condition
    n_participants: int
    checks_mean: float
    checks_sd: float
    combinations_mean: float
    combinations_sd: float
    time_mean_s: float
    time_sd_s: float
    success_mean_s: float | None
    success_sd_s: float | None


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n  # population sd
    return mean, math.sqrt(var)


def condition_stats(traces: Iterable[SessionTrace]) -> list[ConditionStats]:
    """Per-condition means and population standard deviations of the four
    exploration metrics; empty conditions are omitted."""
    groups: dict[Condition, list[SessionTrace]] = {}
    for t in traces:
        groups.setdefault(t.condition, []).append(t)
    out = []
    for cond in sorted(groups, key=lambda c: (c.structure_kind.value, c.hypothesis_given)):
        ts = groups[cond]
        checks = [count_checks(t) for t in ts]
        combos = [unique_combinations(t) for t in ts]
        times = [t.total_time_s() for t in ts]
        succ = [s for s in (time_to_first_success(t) for t in ts) if s is not None]
        cm, cs = _mean_sd(checks)
        km, ks = _mean_sd(combos)
        tm, tsd = _mean_sd(times)
        sm, ssd = _mean_sd(succ) if succ else (None, None)
        out.append(
            ConditionStats(cond, len(ts), cm, cs, km, ks, tm, tsd, sm, ssd)
        )
    return out


def format_stats_table(stats: Sequence[ConditionStats]) -> str:
    """Tabular report, one condition per row, cells as ``mean (sd)``."""

    def cell(mean, sd):
        if mean is None:
            return "-"
        return f"{mean:.2f} ({sd:.2f})"

    header = (
        f"{'Condition':<28} {'N':>3} {'Checks':>14} {'Combinations':>14} "
        f"{'Time (s)':>16} {'Time to Success (s)':>20}"
    )
    lines = [header]
    for s in stats:
        lines.append(
            f"{s.condition.label:<28} {s.n_participants:>3} "
            f"{cell(s.checks_mean, s.checks_sd):>14} "
            f"{cell(s.combinations_mean, s.combinations_sd):>14} "
            f"{cell(s.time_mean_s, s.time_sd_s):>16} "
            f"{cell(s.success_mean_s, s.success_sd_s):>20}"
        )
    return "\n".join(lines)


def two_proportion_z(x1: int, n1: int, x2: int, n2: int) -> tuple[float, float, bool]:
    """Pooled two-proportion z test, two-sided normal p-value.

    Returns (z, p, degenerate); a degenerate pooled proportion of 0 or 1
    yields z=0, p=1 with the flag set.
    """
    if n1 <= 0 or n2 <= 0:
        raise ValueError("sample sizes must be positive")
    if not (0 <= x1 <= n1 and 0 <= x2 <= n2):
        raise ValueError("counts must lie within their sample sizes")
    pooled = (x1 + x2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        return 0.0, 1.0, True
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    z = (x1 / n1 - x2 / n2) / se
    p = math.erfc(abs(z) / math.sqrt(2))
    return z, p, False


# -- JSON Lines serialization ---------------------------------------------


def trace_to_dict(trace: SessionTrace) -> dict:
    events = []
    for ev in trace.events:
        rec: dict = {"t_ms": ev.t_ms, "kind": ev.kind}
        if ev.obj is not None:
            rec["object"] = object_label(ev.obj)
        if ev.outcome is not None:
            rec["outcome"] = ev.outcome.value
        if ev.ref_id is not None:
            rec["id"] = ev.ref_id
        if ev.payload is not None:
            rec["payload"] = ev.payload
        events.append(rec)
    answers: dict = {}
    if trace.blicket_judgments is not None:
        answers["blickets"] = {
            object_label(o): bool(v) for o, v in sorted(trace.blicket_judgments.items())
        }
    if trace.final_combination is not None:
        answers["final_combo"] = [object_label(o) for o in sorted(trace.final_combination)]
    if trace.free_answer is not None:
        answers["free_text"] = trace.free_answer
    return {
        "v": TRACE_SCHEMA_VERSION,
        "session_id": trace.session_id,
        "condition": {
            "kind": trace.condition.structure_kind.value,
            "given": trace.condition.hypothesis_given,
        },
        "ground_truth": trace.ground_truth.name,
        "events": events,
        "answers": answers,
    }


def trace_from_dict(data: dict) -> SessionTrace:
    if data.get("v") != TRACE_SCHEMA_VERSION:
        raise TraceValidationError(f"unsupported trace version: {data.get('v')!r}")
    cond = Condition(
        OverhypothesisKind(data["condition"]["kind"]), bool(data["condition"]["given"])
    )
    events = []
    for rec in data["events"]:
        events.append(
            TraceEvent(
                t_ms=int(rec["t_ms"]),
                kind=rec["kind"],
                obj=object_index(rec["object"]) if "object" in rec else None,
                outcome=Observation(rec["outcome"]) if "outcome" in rec else None,
                ref_id=rec.get("id"),
                payload=rec.get("payload"),
            )
        )
    answers = data.get("answers") or {}
    judgments = None
    if "blickets" in answers:
        judgments = {object_index(k): bool(v) for k, v in answers["blickets"].items()}
    final = None
    if "final_combo" in answers:
        final = frozenset(object_index(k) for k in answers["final_combo"])
    return SessionTrace(
        session_id=data["session_id"],
        condition=cond,
        ground_truth=parse_structure(data["ground_truth"]),
        events=events,
        blicket_judgments=judgments,
        final_combination=final,
        free_answer=answers.get("free_text"),
    )


def write_traces(path, traces: Iterable[SessionTrace]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in traces:
            f.write(json.dumps(trace_to_dict(t)) + "\n")


def read_traces(path) -> list[SessionTrace]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(trace_from_dict(json.loads(line)))
    return out
