import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from blicket.core import enumerate_structures, parse_combination, parse_structure, uniform_prior
from blicket.env import MacroAction, Observation
from blicket.inference import (
    BeliefState,
    ImpossibleObservationError,
    TestOutcomePair as OutcomePair,
    expected_info_gain,
    info_gain,
    likelihood,
    per_step_policy,
    posterior_update,
    predictive_probability,
)
from blicket.tree import ActionNode, Leaf, iter_paths, leaf_depths

ON, OFF = Observation.DETECTOR_ON, Observation.DETECTOR_OFF


def outcome_of(combo: str, obs=ON) -> OutcomePair:
    return OutcomePair(MacroAction(parse_combination(combo)), obs)


class TestPosterior:
    def test_likelihoods_are_zero_one(self, uniform11):
        t = outcome_of("A")
        values = {likelihood(h, t) for h in uniform11.space}
        assert values <= {0, 1}

    def test_update_restricts_and_renormalizes(self, uniform11):
        belief = BeliefState.from_prior(uniform11)
        post = posterior_update(belief, outcome_of("A"))
        # exactly the structures lit by {A}: four disjunctive ones
        assert {h.name for h in post.support()} == {
            "A-dis", "AB-dis", "AC-dis", "ABC-dis"
        }
        assert all(post.weight(h) == Fraction(1, 4) for h in post.support())

    def test_zero_forcing_is_exact(self, uniform11):
        belief = BeliefState.from_prior(uniform11)
        post = posterior_update(belief, outcome_of("A"))
        assert post.weight(parse_structure("AB-con")) == 0

    def test_impossible_observation_raises(self, uniform11):
        belief = BeliefState.from_prior(uniform11)
        belief = posterior_update(belief, outcome_of("A"))
        with pytest.raises(ImpossibleObservationError):
            posterior_update(belief, outcome_of("A", OFF))

    def test_empty_combination_never_lights(self, uniform11):
        belief = BeliefState.from_prior(uniform11)
        assert predictive_probability(belief, MacroAction(frozenset())) == 0

    def test_randomized_updates_stay_normalized(self, uniform11):
        """10k random consistent updates: exact normalization, exact zeros."""
        rng = random.Random(7)
        combos = [frozenset(i for i in range(3) if m >> i & 1) for m in range(8)]
        updates = 0
        belief = BeliefState.from_prior(uniform11)
        while updates < 10_000:
            c = rng.choice(combos)
            action = MacroAction(c)
            p_on = predictive_probability(belief, action)
            obs = ON if rng.random() < float(p_on) else OFF
            try:
                belief = posterior_update(belief, OutcomePair(action, obs))
            except ImpossibleObservationError:
                continue
            updates += 1
            assert sum(belief.weights) == 1  # exact rational arithmetic
            assert all(w == 0 or w > 0 for w in belief.weights)
            if len(belief.support()) == 1:
                belief = BeliefState.from_prior(uniform11)


class TestInformationGain:
    def test_realized_gain_is_neg_log_predictive(self, uniform11):
        belief = BeliefState.from_prior(uniform11)
        t = outcome_of("A")
        p = predictive_probability(belief, t.action)
        assert info_gain(belief, t) == pytest.approx(-math.log2(float(p)), abs=1e-12)

    def test_gain_of_log2_eleven_fourths(self, uniform11):
        # four of eleven structures light for {A}: gain is log2(11/4) bits
        belief = BeliefState.from_prior(uniform11)
        assert info_gain(belief, outcome_of("A")) == pytest.approx(
            1.4594316186372973, abs=1e-12
        )

    def test_expected_gain_is_binary_entropy(self, uniform11):
        # p_on({A}) = 4/11, so EIG is the binary entropy of 4/11
        belief = BeliefState.from_prior(uniform11)
        eig = expected_info_gain(belief, MacroAction(parse_combination("A")))
        assert eig == pytest.approx(0.9456603046006402, abs=1e-12)

    def test_uninformative_tests_have_zero_gain(self, uniform11):
        belief = BeliefState.from_prior(uniform11)
        assert expected_info_gain(belief, MacroAction(frozenset())) == 0.0
        assert expected_info_gain(belief, MacroAction(frozenset({0, 1, 2}))) == 0.0

    @given(st.integers(0, 7))
    def test_expected_gain_nonnegative_and_bounded(self, mask):
        space = enumerate_structures(3)
        belief = BeliefState.from_prior(uniform_prior(space))
        c = frozenset(i for i in range(3) if mask >> i & 1)
        eig = expected_info_gain(belief, MacroAction(c))
        assert 0.0 <= eig <= 1.0  # one binary observation


class TestPerStepPolicy:
    def test_every_leaf_is_consistent_with_its_path(self, uniform11):
        from blicket.core import activates

        tree = per_step_policy(BeliefState.from_prior(uniform11))
        for path, identified in iter_paths(tree):
            survivors = [
                h for h in uniform11.space
                if all(activates(h, c) == (o is ON) for c, o in path)
            ]
            assert survivors == [identified]

    def test_identifies_all_eleven(self, uniform11):
        tree = per_step_policy(BeliefState.from_prior(uniform11))
        assert set(leaf_depths(tree)) == set(uniform11.space.hypotheses)

    def test_root_action_has_maximal_gain(self, uniform11):
        belief = BeliefState.from_prior(uniform11)
        tree = per_step_policy(belief)
        assert isinstance(tree, ActionNode)
        best = max(
            expected_info_gain(belief, MacroAction(c))
            for c in uniform11.space.combinations()
        )
        assert expected_info_gain(belief, tree.action) == pytest.approx(best)

    def test_support_scope_stops_at_single_hypothesis(self, experimental6):
        belief = BeliefState.from_prior(experimental6)
        tree = per_step_policy(belief, disambiguate_space=False)
        assert set(leaf_depths(tree)) == set(experimental6.support())

    def test_space_scope_still_separates_zero_weight_hypotheses(self, experimental6):
        tree = per_step_policy(BeliefState.from_prior(experimental6))
        assert len(leaf_depths(tree)) == 11

    def test_single_candidate_yields_empty_tree(self):
        space = enumerate_structures(2)
        from blicket.core import Prior

        point = Prior(space, [1, 0, 0, 0])
        assert per_step_policy(BeliefState.from_prior(point),
                               disambiguate_space=False) is None

    def test_chain_identity_on_every_path(self, uniform11, experimental6):
        """Summed realized gains along a path equal -log2 of the leaf's prior."""
        for prior in (uniform11, experimental6):
            tree = per_step_policy(BeliefState.from_prior(prior))
            for path, identified in iter_paths(tree):
                w = prior.weight(identified)
                if w == 0:
                    continue  # unreachable under this prior
                belief = BeliefState.from_prior(prior)
                total = 0.0
                for c, o in path:
                    t = OutcomePair(MacroAction(c), o)
                    total += info_gain(belief, t)
                    belief = posterior_update(belief, t)
                assert total == pytest.approx(-math.log2(float(w)), abs=1e-9)
