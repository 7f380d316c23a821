import random

import pytest
from hypothesis import given, settings, strategies as st

from mars import (
    ModelKind,
    Scenario,
    ScenarioSyntaxError,
    Stratification,
    Weights,
    impact_representation,
    parse_scenario,
    serialize_scenario,
)
from mars.dsl import ERROR_KINDS, SourceSpan, format_error, try_parse

from conftest import GOLDEN, HAL_TEXT, hal
from fuzzing import covered, generate
from oracles import random_scenario

GOLDEN_FILES = sorted(GOLDEN.glob("*.mars"))


def errors_of(text):
    scenario, errors = try_parse(text)
    assert scenario is None
    return errors


def test_hal_file():
    s = parse_scenario(HAL_TEXT)
    assert (s.n, s.m, s.stratification.k) == (2, 3, 2)
    assert impact_representation(s, "take_insulin") == (1, -1, -1)
    assert s == hal()
    assert s.name == "Hal the Diabetic" and s.default_model is ModelKind.ADDITIVE


def test_property_in_two_strata_reports_both_spans():
    text = HAL_TEXT.replace("stratum 1: hals_life, carlas_life", "stratum 1: hals_life, carlas_life, property")
    (err,) = errors_of(text)
    assert err.kind == "partition-violation"
    assert err.span == SourceSpan(5, 12, 8)
    assert err.related == (SourceSpan(4, 36, 8),)


def test_out_of_range_coefficient():
    (err,) = errors_of(HAL_TEXT.replace("hals_life=+1", "hals_life=+2", 1))
    assert err.kind == "bad-coefficient"
    assert err.span == SourceSpan(6, 32, 2)


@pytest.mark.parametrize("text,kind,span", [
    ('scenario "x"\nactions: a, a\nvalues:\n', "duplicate-id", (2, 13, 1)),
    ("actions: a\nvalues: v\nstratum 1: w\n", "unknown-reference", (3, 12, 1)),
    ("actions: a\nvalues: v\nstratum 1: v\nweight v: 0\n", "bad-weight", (4, 11, 1)),
    ("actions: a\nvalues: v\nstratum 1: v\nweight v: heavy\n", "bad-weight", (4, 11, 5)),
    ("actions: a\nvalues: v\nstratum 1: v\nstratum 2:\n", "partition-violation", (4, 1, 9)),
    ("actions: a\nvalues: v, w\nstratum 1: v\n", "partition-violation", (2, 12, 1)),
    ("actions: a\nvalues: v\nstratum 2: v\n", "syntax", (3, 9, 1)),
    ("actions: a\nvalues: v\nstratum 1: v\nimpact b: v=+1\n", "unknown-reference", (4, 8, 1)),
    ("actions: a\nvalues: v\nstratum 1: v\nimpact a: v=+1\nimpact a: v=-1\n", "duplicate-id", (5, 8, 1)),
    ("actions: a\nvalues: v\nstratum 1: v\nmodel: best\n", "syntax", (4, 8, 4)),
    ("actions: a\nvalues: v\nstratum 1: v\nscenario \"open\n", "syntax", (4, 10, 5)),
    ("values: v\nstratum 1: v\n", "syntax", (1, 1, 1)),
    ("actions:\nvalues:\n", "syntax", (1, 1, 7)),
    ("actions: a\nactions: b\nvalues:\n", "syntax", (2, 1, 7)),
    ("actions: a b\nvalues:\n", "syntax", (1, 12, 1)),
    ("actions: a\nvalues:\nvalues:\n", "syntax", (3, 1, 6)),
])
def test_error_kinds_and_spans(text, kind, span):
    errors = errors_of(text)
    assert all(e.kind in ERROR_KINDS for e in errors)
    assert (kind, SourceSpan(*span)) in [(e.kind, e.span) for e in errors]


def test_errors_are_batched_in_source_order():
    text = "actions: a, a\nvalues: v, w\nstratum 1: v, x\nimpact a: v=+3, w=-1\nmodel: nope\n"
    errors = errors_of(text)
    kinds = [e.kind for e in errors]
    assert kinds == ["duplicate-id", "partition-violation", "unknown-reference", "bad-coefficient", "syntax"]
    assert [e.span.line for e in errors] == sorted(e.span.line for e in errors)
    with pytest.raises(ScenarioSyntaxError) as info:
        parse_scenario(text)
    assert info.value.errors == errors


def test_comments_blank_lines_and_free_order():
    text = """
# Hal, written out of canonical order
scenario "Hal the Diabetic"
model: additive   # the default anyway
impact dont_take_insulin: property=+1, hals_life=-1, carlas_life=+1
values: hals_life, carlas_life, property

stratum 1: hals_life, carlas_life
actions: take_insulin, dont_take_insulin
stratum 2: property
impact take_insulin: hals_life=1, carlas_life=-1, property=-1, hals_life=+1
"""
    # the repeated hals_life entry is an error even with the same coefficient
    assert [e.kind for e in errors_of(text)] == ["duplicate-id"]
    s = parse_scenario(text.replace(", hals_life=+1\n", "\n"))
    assert s == hal()
    assert serialize_scenario(s) == HAL_TEXT


def test_zero_coefficients_and_unit_weights_are_omitted():
    s = Scenario("z", ("a", "b"), ("x",), Stratification.of("x"), {("a", "x"): 0}, Weights({"x": 1.0}))
    assert serialize_scenario(s) == 'scenario "z"\nactions: a, b\nvalues: x\nstratum 1: x\nmodel: additive\n'


def test_weight_line_uses_shortest_repr():
    s = hal(weights={"carlas_life": 0.1, "property": 1e-20})
    text = serialize_scenario(s)
    assert "weight carlas_life: 0.1\n" in text and "weight property: 1e-20\n" in text
    assert parse_scenario(text) == s


def test_name_escapes_round_trip():
    s = Scenario('say "hi"\\\n\tnow\x07', ("a",), (), Stratification(()))
    text = serialize_scenario(s)
    assert text.startswith('scenario "say \\"hi\\"\\\\\\n\\tnow\\u0007"\n')
    assert parse_scenario(text) == s


def test_crlf_input():
    assert parse_scenario(HAL_TEXT.replace("\n", "\r\n")) == hal()


def test_format_error_with_caret():
    text = HAL_TEXT.replace("hals_life=+1", "hals_life=+2", 1)
    (err,) = errors_of(text)
    rendered = format_error(err, text, "hal.mars")
    assert rendered.splitlines() == [
        "hal.mars:6:32: error[bad-coefficient]: coefficient '+2' is not one of -1, 0, +1",
        "    impact take_insulin: hals_life=+2, carlas_life=-1, property=-1",
        "                                   ^^",
    ]
    assert "\x1b[31m" in format_error(err, text, "hal.mars", color=True)


def test_golden_corpus_has_twenty_files():
    assert len(GOLDEN_FILES) == 20


@pytest.mark.parametrize("path", GOLDEN_FILES, ids=lambda p: p.stem)
def test_golden_round_trip(path):
    text = path.read_text(encoding="utf-8")
    s = parse_scenario(text)
    assert serialize_scenario(s) == text
    assert parse_scenario(serialize_scenario(s)) == s


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(ModelKind)), st.text(max_size=10))
def test_random_round_trip(seed, kind, name):
    base = random_scenario(random.Random(seed))
    s = Scenario(name, base.actions, base.values, base.stratification, base.impacts, base.weights, kind)
    assert parse_scenario(serialize_scenario(s)) == s


def test_fuzz_sample():
    texts = [p.read_text(encoding="utf-8") for p in GOLDEN_FILES]
    for c in generate(texts, 1500, seed=99):
        scenario, errors = try_parse(c.text)
        assert scenario is None, c.op
        assert covered(errors, c), (c.op, c.line, c.col)
