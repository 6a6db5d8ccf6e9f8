"""Causal-learning toolkit around the blicket detector.

Hypothesis spaces over disjunctive and conjunctive machines, a deterministic
detector environment, Bayesian belief updating with information-gain scoring,
greedy and exactly-optimal policy-tree planners, session-trace analytics, and
a live-session service for running the task with remote participants.
"""

from .core import (
    CausalStructure,
    HypothesisSpace,
    OverhypothesisKind,
    Prior,
    activates,
    enumerate_structures,
    experimental_prior,
    parse_structure,
    uniform_prior,
)
from .env import EnvAction, EnvState, MacroAction, Observation, reset, run_macro, step
from .inference import (
    BeliefState,
    ImpossibleObservationError,
    IndistinguishableHypothesesError,
    TestOutcomePair,
    expected_info_gain,
    info_gain,
    per_step_policy,
    posterior_update,
)
from .planner import PlanResult, expected_steps, min_step_policy
from .tree import ActionNode, Leaf, PolicyTree, format_text, to_dot
from .traces import Condition, SessionTrace, TraceEvent, read_traces, write_traces

__version__ = "1.0.0"

__all__ = [
    "ActionNode",
    "BeliefState",
    "CausalStructure",
    "Condition",
    "EnvAction",
    "EnvState",
    "HypothesisSpace",
    "ImpossibleObservationError",
    "IndistinguishableHypothesesError",
    "Leaf",
    "MacroAction",
    "Observation",
    "OverhypothesisKind",
    "PlanResult",
    "PolicyTree",
    "Prior",
    "SessionTrace",
    "TestOutcomePair",
    "TraceEvent",
    "activates",
    "enumerate_structures",
    "expected_info_gain",
    "expected_steps",
    "experimental_prior",
    "format_text",
    "info_gain",
    "min_step_policy",
    "parse_structure",
    "per_step_policy",
    "posterior_update",
    "read_traces",
    "reset",
    "run_macro",
    "step",
    "to_dot",
    "uniform_prior",
    "write_traces",
]
