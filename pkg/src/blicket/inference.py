"""Bayesian ideal-observer machinery.

The detector is deterministic, so likelihoods are 0/1 and posterior updates
just restrict and renormalize the belief.  Information gain is the KL
divergence of the posterior from the prior in bits; for deterministic
likelihoods the expected gain of a test equals the binary entropy of its
predictive on-probability.

Weights are kept as exact rationals so zero-forcing and normalization are
exact; gains are reported as floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import CausalStructure, Combination, HypothesisSpace, Prior, activates
from .env import MacroAction, Observation
from .tree import ActionNode, Leaf, PolicyTree, sort_key


class ImpossibleObservationError(ValueError):
    """The observed outcome has zero predictive probability under the belief:
    either the trace is corrupted or the hypothesis space is wrong."""


class IndistinguishableHypothesesError(ValueError):
    """No available test separates two hypotheses that must be told apart."""

    def __init__(self, a: CausalStructure, b: CausalStructure):
        super().__init__(f"no test distinguishes {a.name} from {b.name}")
        self.pair = (a, b)


@dataclass(frozen=True)
class TestOutcomePair:
    action: MacroAction
    observation: Observation


class BeliefState:
    """Distribution over a hypothesis space, index-aligned with the space.

    Hypotheses ruled out by evidence stay in the vector with weight exactly 0.
    """

    def __init__(self, space: HypothesisSpace, weights: Iterable[Fraction | int | float]):
        ws = [Fraction(w) for w in weights]
        if len(ws) != len(space):
            raise ValueError("one weight per hypothesis required")
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        total = sum(ws)
        if total == 0:
            raise ValueError("support must be nonempty")
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (got {float(total)})")
        self.space = space
        self.weights = tuple(ws)

    @classmethod
    def from_prior(cls, prior: Prior) -> "BeliefState":
        return cls(prior.space, prior.weights)

    def weight(self, h: CausalStructure) -> Fraction:
        return self.weights[self.space.index(h)]

    def support(self) -> list[CausalStructure]:
        return [h for h, w in zip(self.space.hypotheses, self.weights) if w > 0]

    def entropy_bits(self) -> float:
        return -sum(float(w) * math.log2(float(w)) for w in self.weights if w > 0)

    def __repr__(self) -> str:  # pragma: no cover
        parts = [
            f"{h.name}:{w}" for h, w in zip(self.space.hypotheses, self.weights) if w > 0
        ]
        return "BeliefState(" + ", ".join(parts) + ")"


def likelihood(h: CausalStructure, test: TestOutcomePair) -> int:
    """p(observation | hypothesis): 1 when the deterministic machine agrees."""
    lit = activates(h, test.action.combination)
    return 1 if lit == test.observation.lit else 0


def predictive_probability(belief: BeliefState, action: MacroAction) -> Fraction:
    """Probability the detector turns on for this test under the belief."""
    return sum(
        (w for h, w in zip(belief.space.hypotheses, belief.weights)
         if w > 0 and activates(h, action.combination)),
        Fraction(0),
    )


def posterior_update(belief: BeliefState, test: TestOutcomePair) -> BeliefState:
    """Bayes rule for one test outcome; inconsistent hypotheses get exactly 0."""
    p_obs = sum(
        (w for h, w in zip(belief.space.hypotheses, belief.weights)
         if likelihood(h, test)),
        Fraction(0),
    )
    if p_obs == 0:
        raise ImpossibleObservationError(
            f"observation {test.observation.value} on "
            f"{sorted(test.action.combination)} has zero probability"
        )
    new = [
        w / p_obs if likelihood(h, test) else Fraction(0)
        for h, w in zip(belief.space.hypotheses, belief.weights)
    ]
    return BeliefState(belief.space, new)


def info_gain(belief: BeliefState, test: TestOutcomePair) -> float:
    """Realized KL divergence (bits) of the updated belief from ``belief``.

    With 0/1 likelihoods this reduces to -log2 of the outcome's predictive
    probability.
    """
    posterior = posterior_update(belief, test)
    gain = 0.0
    for w_post, w_pre in zip(posterior.weights, belief.weights):
        if w_post > 0:
            gain += float(w_post) * math.log2(float(w_post) / float(w_pre))
    return max(gain, 0.0)


def expected_info_gain(belief: BeliefState, action: MacroAction) -> float:
    """Predictive-weighted KL over both outcomes; impossible outcomes add 0."""
    total = 0.0
    for obs in Observation:
        test = TestOutcomePair(action, obs)
        p = sum(
            (w for h, w in zip(belief.space.hypotheses, belief.weights)
             if likelihood(h, test)),
            Fraction(0),
        )
        if p > 0:
            total += float(p) * info_gain(belief, test)
    return total


def _entropy_bits(p: Fraction) -> float:
    p = float(p)
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def per_step_policy(belief: BeliefState, disambiguate_space: bool = True) -> PolicyTree | None:
    """Greedy test-selection tree: at every node pick the combination with the
    highest expected information gain under the current belief.

    With ``disambiguate_space`` (the default) the tree keeps testing until the
    observations pin down a single hypothesis of the whole space, so it stays
    comparable with the minimum-step planner even when the belief puts zero
    weight on part of the space; gain ties (including the all-zero tail after
    the belief support is already resolved) are broken by the gain a uniform
    belief over the remaining candidates would assign, then by fewest objects,
    then by largest bitmask.  With ``disambiguate_space=False`` the tree stops
    as soon as the belief support is a single hypothesis.

    Returns ``None`` (the empty tree) when there is nothing to test.
    """
    space = belief.space
    combos = [c for c in space.combinations()]

    def build(bel: BeliefState, candidates: frozenset) -> PolicyTree:
        if len(candidates) == 1:
            return Leaf(next(iter(candidates)))
        scored = []
        for c in combos:
            on = frozenset(h for h in candidates if activates(h, c))
            off = candidates - on
            if not on or not off:
                continue  # vacuous on the remaining candidates
            p_on = sum((bel.weight(h) for h in on), Fraction(0))
            mass = sum((bel.weight(h) for h in candidates), Fraction(0))
            primary = _entropy_bits(p_on / mass) if mass > 0 else 0.0
            secondary = _entropy_bits(Fraction(len(on), len(candidates)))
            scored.append(((-primary, -secondary) + sort_key(c), c, on, off))
        if not scored:
            a, b = sorted(candidates, key=lambda h: h.name)[:2]
            raise IndistinguishableHypothesesError(a, b)
        _, c, on, off = min(scored)
        branches = {}
        for obs, subset in ((Observation.DETECTOR_ON, on), (Observation.DETECTOR_OFF, off)):
            sub_mass = sum((bel.weight(h) for h in subset), Fraction(0))
            if sub_mass > 0:
                nb = BeliefState(
                    space,
                    [
                        bel.weight(h) / sub_mass if h in subset else Fraction(0)
                        for h in space.hypotheses
                    ],
                )
            else:
                nb = bel  # zero-probability branch: weights are irrelevant below
            branches[obs] = build(nb, subset)
        return ActionNode(MacroAction(c), branches)

    if disambiguate_space:
        candidates = frozenset(space.hypotheses)
    else:
        candidates = frozenset(belief.support())
    if len(candidates) <= 1:
        return None
    return build(belief, candidates)
