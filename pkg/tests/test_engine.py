import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from mars import (
    EvaluationModel,
    GmmRequiresTotalOrder,
    ModelError,
    ModelKind,
    Preference,
    Scenario,
    Stratification,
    UnknownIdError,
    Weights,
    compare,
    evaluation_vector,
    preferred_actions,
    preferred_set,
    satisfaction_filter,
    stratum_aggregate,
)
from mars.engine import VECTOR_MODELS, satisfaction_stages
from mars.errors import StratumIndexError

from conftest import EGALITARIAN, SELFISH, hal
from oracles import additive_prefers, global_maximum_prefers, preferred_by, random_scenario

FIRST, SECOND, TIE = Preference.FIRST_PREFERRED, Preference.SECOND_PREFERRED, Preference.TIE
TAKE, DONT = "take_insulin", "dont_take_insulin"


def models_for(s: Scenario):
    kinds = list(ModelKind)
    if not s.stratification.is_total_order():
        kinds.remove(ModelKind.GLOBAL_MAXIMUM)
    return kinds


scenarios = st.builds(
    lambda seed, single: random_scenario(random.Random(seed), singleton_strata=single),
    st.integers(0, 2**32), st.booleans(),
)


# -- stratum_aggregate / evaluation_vector ------------------------------------

def test_aggregate_egalitarian_take_insulin(egalitarian_hal):
    assert stratum_aggregate(egalitarian_hal, TAKE, 1) == 0
    assert stratum_aggregate(egalitarian_hal, TAKE, 2) == -1


def test_aggregate_weighted(egalitarian_hal):
    w = Weights({"hals_life": 2, "carlas_life": 1})
    direct = 2 * 1 + 1 * -1
    assert stratum_aggregate(egalitarian_hal, TAKE, 1, w) == direct == 1


@pytest.mark.parametrize("index", [0, 3, -1])
def test_aggregate_bounds(egalitarian_hal, index):
    with pytest.raises(StratumIndexError):
        stratum_aggregate(egalitarian_hal, TAKE, index)


def test_vector_additive_dont_take(egalitarian_hal):
    vec = evaluation_vector(egalitarian_hal, ModelKind.ADDITIVE, DONT)
    assert vec.scores == (0, 1) and vec.higher_is_better


def test_vector_min_negative_count_selfish():
    s = hal(SELFISH)
    row = (1, -1, -1)
    expected = tuple(sum(1 for c in (row[i],) if c == -1) for i in range(3))
    vec = evaluation_vector(s, "min-negative-count", TAKE)
    assert vec.scores == expected == (0, 1, 1)
    assert not vec.higher_is_better


def test_vector_min_demotion_sum_zero_row():
    s = Scenario("z", ("idle", "act"), ("a", "b", "c"), Stratification.of("ab", "c"), {("act", "a"): -1})
    assert evaluation_vector(s, ModelKind.MIN_DEMOTION_SUM, "idle").scores == (0, 0)
    assert evaluation_vector(s, ModelKind.MIN_DEMOTION_SUM, "act").scores == (1, 0)


@pytest.mark.parametrize("kind", [ModelKind.GLOBAL_MAXIMUM, ModelKind.STRATUM_SATISFACTION])
def test_vector_rejects_set_models(selfish_hal, kind):
    with pytest.raises(ModelError):
        evaluation_vector(selfish_hal, kind, TAKE)


def test_unknown_model_name(egalitarian_hal):
    with pytest.raises(ModelError):
        compare(egalitarian_hal, "utilitarian", TAKE, DONT)


# -- compare ---------------------------------------------------------------------

def test_selfish_global_maximum_prefers_take(selfish_hal):
    assert compare(selfish_hal, ModelKind.GLOBAL_MAXIMUM, TAKE, DONT) is FIRST
    assert compare(selfish_hal, ModelKind.GLOBAL_MAXIMUM, DONT, TAKE) is SECOND


def test_egalitarian_additive_prefers_dont(egalitarian_hal):
    assert compare(egalitarian_hal, ModelKind.ADDITIVE, TAKE, DONT) is SECOND


def test_weighted_hal_life_double(egalitarian_hal):
    model = EvaluationModel(ModelKind.WEIGHTED_ADDITIVE, Weights({"hals_life": 2}))
    assert compare(egalitarian_hal, model, TAKE, DONT) is FIRST
    assert additive_prefers(egalitarian_hal, TAKE, DONT, model.weights)


def test_weighted_uses_scenario_weights_by_default():
    s = hal(EGALITARIAN, weights={"hals_life": 2})
    assert compare(s, "weighted-additive", TAKE, DONT) is FIRST
    assert compare(s, "additive", TAKE, DONT) is SECOND


@pytest.mark.parametrize("kind", list(ModelKind))
def test_self_comparison_is_tie(selfish_hal, kind):
    assert compare(selfish_hal, kind, TAKE, TAKE) is TIE


def test_gmm_rejects_non_singleton_stratum(egalitarian_hal):
    with pytest.raises(GmmRequiresTotalOrder) as info:
        compare(egalitarian_hal, ModelKind.GLOBAL_MAXIMUM, TAKE, DONT)
    assert info.value.stratum_index == 1
    assert info.value.values == ("hals_life", "carlas_life")
    with pytest.raises(GmmRequiresTotalOrder):
        preferred_set(egalitarian_hal, ModelKind.GLOBAL_MAXIMUM)


def test_gmm_formula_breaks_asymmetry_with_ties_in_a_stratum():
    # Why the total-order guard exists: evaluated literally, the formula prefers both ways.
    s = Scenario("x", ("a", "b"), ("p", "q"), Stratification.of("pq"), {("a", "p"): 1, ("b", "q"): 1})
    assert global_maximum_prefers(s, "a", "b") and global_maximum_prefers(s, "b", "a")


def test_compare_unknown_action(egalitarian_hal):
    with pytest.raises(UnknownIdError):
        compare(egalitarian_hal, "additive", TAKE, "run_away")


# -- preferred_set and satisfaction -----------------------------------------------

def test_preferred_selfish_gmm(selfish_hal):
    assert preferred_set(selfish_hal, ModelKind.GLOBAL_MAXIMUM).preferred == (TAKE,)


def test_preferred_egalitarian_additive(egalitarian_hal):
    assert preferred_set(egalitarian_hal, ModelKind.ADDITIVE).preferred == (DONT,)


@pytest.mark.parametrize("kind", sorted(VECTOR_MODELS, key=str))
def test_identical_rows_both_preferred(kind):
    row = {"x": 1, "y": -1}
    s = Scenario("twins", ("a", "b"), ("x", "y"), Stratification.of("x", "y"), {"a": row, "b": row})
    assert preferred_set(s, kind).preferred == ("a", "b")


def test_satisfaction_selfish():
    assert satisfaction_filter(hal(SELFISH)) == (TAKE,)


def test_satisfaction_nothing_promoted():
    s = Scenario("bleak", ("a", "b", "c"), ("x", "y"), Stratification.of("x", "y"),
                 {("a", "x"): -1, ("b", "y"): -1})
    assert satisfaction_filter(s) == ("a", "b", "c")
    assert all(not stage.restricted for stage in satisfaction_stages(s))


def test_satisfaction_egalitarian():
    stages = satisfaction_stages(hal(EGALITARIAN))
    # Both actions satisfy the top stratum (take via Hal's life, don't via Carla's).
    assert stages[0].promoters == (TAKE, DONT)
    assert stages[0].survivors == (TAKE, DONT)
    # Filtering then continues: only not taking promotes property.
    assert stages[1].survivors == (DONT,)
    assert satisfaction_filter(hal(EGALITARIAN)) == (DONT,)
    assert satisfaction_filter(hal(EGALITARIAN), exhaustive=False) == (TAKE, DONT)


def test_satisfaction_compare_follows_survival():
    s = hal(SELFISH)
    assert compare(s, ModelKind.STRATUM_SATISFACTION, TAKE, DONT) is FIRST
    assert preferred_set(s, ModelKind.STRATUM_SATISFACTION).preferred == (TAKE,)


def test_no_values_everything_ties():
    s = Scenario("void", ("a", "b", "c"), (), Stratification(()))
    for kind in ModelKind:
        assert preferred_set(s, kind).preferred == ("a", "b", "c")


def test_default_model_from_scenario(selfish_hal):
    assert preferred_set(selfish_hal).trace.model is ModelKind.GLOBAL_MAXIMUM


# -- properties ----------------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(scenarios)
def test_asymmetry_and_transitivity(s):
    for kind in models_for(s):
        rel = {(a, b): compare(s, kind, a, b) for a in s.actions for b in s.actions}
        for a, b in rel:
            assert rel[a, b] is rel[b, a].flipped()
        if kind in VECTOR_MODELS:
            for a, b, c in itertools.permutations(s.actions, 3):
                if rel[a, b] is FIRST and rel[b, c] is FIRST:
                    assert rel[a, c] is FIRST
                if rel[a, b] is TIE and rel[b, c] is TIE:
                    assert rel[a, c] is TIE


@settings(max_examples=200, deadline=None)
@given(scenarios)
def test_lexicographic_matches_formula(s):
    for a, b in itertools.permutations(s.actions, 2):
        assert (compare(s, "additive", a, b) is FIRST) == additive_prefers(s, a, b)
        assert (compare(s, "weighted-additive", a, b) is FIRST) == additive_prefers(s, a, b, s.weights)


@settings(max_examples=100, deadline=None)
@given(scenarios)
def test_weighted_with_unit_weights_is_additive(s):
    s = s.with_weights({})
    for a, b in itertools.product(s.actions, repeat=2):
        assert compare(s, "weighted-additive", a, b) is compare(s, "additive", a, b)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_gmm_equals_additive_on_total_orders(seed):
    s = random_scenario(random.Random(seed), singleton_strata=True)
    for a, b in itertools.product(s.actions, repeat=2):
        assert compare(s, "global-maximum", a, b) is compare(s, "additive", a, b)
        assert (compare(s, "global-maximum", a, b) is FIRST) == global_maximum_prefers(s, a, b)
    assert set(preferred_set(s, "global-maximum").preferred) == preferred_by(s, global_maximum_prefers)


@settings(max_examples=100, deadline=None)
@given(scenarios, st.integers(1, 64), st.integers(0, 6))
def test_weight_scaling_invariance(s, num, shift):
    c = num / 2**shift
    scaled = s.with_weights(s.weights.scaled(c, s.values))
    for a, b in itertools.product(s.actions, repeat=2):
        assert compare(s, "weighted-additive", a, b) is compare(scaled, "weighted-additive", a, b)


@settings(max_examples=100, deadline=None)
@given(scenarios)
def test_preferred_set_nonempty_and_matches_fast_path(s):
    for kind in models_for(s):
        result = preferred_set(s, kind)
        assert result.preferred
        assert result.preferred == preferred_actions(s, kind)
