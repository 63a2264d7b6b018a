import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ceverify import fixtures as fx
from ceverify.model import (
    FormatError,
    ModelError,
    advice_to_dict,
    bit_length,
    format_rational,
    game_to_dict,
    make_advice,
    make_game,
    model_stats,
    parse_advice,
    parse_game,
    parse_joint,
    parse_rational,
    serialize_advice,
    serialize_game,
)

from conftest import instances


def one_state_game():
    return make_game(["q"], "q", ["p"], ["a"], {("q", "p"): ["a"]}, {("q", ("a",)): {"q": 1}}, {"p": []})


@pytest.mark.parametrize(
    "text, value",
    [
        ("1/3", Fraction(1, 3)),
        ("2/6", Fraction(1, 3)),
        ("0.125", Fraction(1, 8)),
        ("0b0.101", Fraction(5, 8)),
        ("0b1", Fraction(1)),
        (3, Fraction(3)),
        (" 7 / 8 ", Fraction(7, 8)),
    ],
)
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["1/0", "abc", "0b", 0.5, True, None])
def test_parse_rational_rejects(bad):
    with pytest.raises(FormatError):
        parse_rational(bad)


def test_rational_arithmetic():
    assert Fraction(1, 3) + Fraction(1, 6) == Fraction(1, 2)
    assert Fraction(7, 8) > Fraction(6, 8)
    assert 1 - Fraction(1, 4) + Fraction(1, 8) == Fraction(7, 8)
    with pytest.raises(ZeroDivisionError):
        Fraction(1, 3) / Fraction(0)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_rationals_lowest_terms(n, d):
    x = parse_rational(f"{n}/{d}")
    assert x.denominator > 0
    from math import gcd
    assert gcd(abs(x.numerator), x.denominator) == 1
    if n:
        assert x * (1 / x) == 1
    assert parse_rational(format_rational(x)) == x


def test_bit_length():
    assert bit_length(Fraction(1, 4)) == 3
    assert bit_length(Fraction(1, 3)) == 2
    assert bit_length(Fraction(-5, 2)) == 3


def test_market_entry_document_parses():
    g = fx.market_entry()
    g2 = parse_game(serialize_game(g))
    assert len(g2.states) == 6 and len(g2.players) == 2
    assert g2 == g


def test_smallest_game_is_valid():
    g = one_state_game()
    assert g.delta("q", ("a",)) == {"q": 1}


def _doc():
    return {
        "states": ["q"], "initial": "q", "players": ["p"], "actions": ["a", "b"],
        "availability": {"q": {"p": ["a"]}},
        "transitions": [{"state": "q", "joint": ["a"], "to": {"q": "1"}}],
        "goals": {"p": []},
    }


def test_row_sum_error():
    doc = _doc()
    doc["transitions"][0]["to"] = {"q": "9/10"}
    with pytest.raises(ModelError, match="stochasticity violated"):
        parse_game(json.dumps(doc))


def test_missing_transition_names_state():
    doc = _doc()
    doc["transitions"] = []
    with pytest.raises(ModelError, match="'q'"):
        parse_game(json.dumps(doc))


def test_forbidden_transition_rejected():
    doc = _doc()
    doc["transitions"].append({"state": "q", "joint": ["b"], "to": {"q": "1"}})
    with pytest.raises(ModelError, match="forbidden"):
        parse_game(json.dumps(doc))


def test_syntax_error_has_position():
    with pytest.raises(FormatError, match="line 1 column"):
        parse_game('{"states": [1,}')


def test_wildcard_transitions():
    doc = _doc()
    doc["availability"] = {"q": {"p": ["a", "b"]}}
    doc["transitions"] = [{"state": "q", "joint": "*", "to": {"q": "1"}}]
    g = parse_game(json.dumps(doc))
    assert g.delta("q", ("b",)) == {"q": 1}


def test_querying_forbidden_joint_is_an_error():
    g = one_state_game()
    with pytest.raises(ModelError):
        g.delta("q", ("b",))


def test_chicken_advice_valid():
    g = fx.chicken()
    d = fx.chicken_uniform(g)
    assert sum(p for _, p in d.rows("play")) == 1
    assert len(d.rows("play")) == 3


def test_forbidden_recommendation_rejected():
    g = fx.market_entry()
    with pytest.raises(ModelError, match="forbidden action"):
        make_advice(g, {
            **{q: {("wait", "wait"): 1} for q in g.states},
            "p1": {("enter", "wait"): "1/2", ("enter", "pass"): "1/2"},
            "p2": {("wait", "pass"): 1},
        })


def test_running_example_advice_valid():
    g = fx.three_players()
    d = fx.three_players_advice(g)
    assert dict(d.rows("q")) == {("a", "a", "b"): Fraction(1, 2), ("b", "b", "b"): Fraction(1, 2)}


@pytest.mark.parametrize(
    "rows, msg",
    [
        ({"aab": "1/2", "bbb": "1/4"}, "sums to 1/4|sums to 3/4"),
        ({"aab": "1/2", "aa": "1/2"}, "one action per player"),
        ({"aac": 1}, "unknown action"),
    ],
)
def test_advice_errors(rows, msg):
    g = fx.three_players()
    table = {q: {"aaa": 1} for q in g.states}
    table["q"] = rows
    with pytest.raises((ModelError, FormatError), match=msg):
        make_advice(g, table)


def test_advice_duplicate_rows():
    g = fx.three_players()
    with pytest.raises(ModelError, match="duplicate"):
        parse_advice(json.dumps({"advice": {
            **{q: [{"joint": "aaa", "p": "1"}] for q in g.states},
            "q": [{"joint": "aab", "p": "1/2"}, {"joint": ["a", "a", "b"], "p": "1/2"}],
        }}), g)


def test_advice_missing_state():
    g = fx.discontinuity()
    with pytest.raises(ModelError, match="q1"):
        parse_advice(json.dumps({"advice": {"q0": [{"joint": ["a"], "p": "1"}]}}), g)


def test_parse_joint_forms():
    assert parse_joint("aab", 3) == ("a", "a", "b")
    assert parse_joint("C, D", 2) == ("C", "D")
    assert parse_joint(["x", "y"], 2) == ("x", "y")
    with pytest.raises(FormatError):
        parse_joint("ab", 3)


def test_model_stats():
    g = fx.three_players()
    table = {q: {"aaa": 1} for q in g.states}
    table["q"] = {"aab": "1/3", "bbb": "1/3", "aaa": "1/3"}
    table["t_aaa"] = {"aab": "1/2", "bbb": "1/2"}
    s = model_stats(g, make_advice(g, table))
    assert (s.t, s.ell) == (3, 2)
    table["q"] = {"aab": "1/2", "bbb": "1/4", "aaa": "1/4"}
    s = model_stats(g, make_advice(g, table))
    assert (s.t, s.ell) == (3, 3)
    assert (s.n_states, s.n_players, s.n_actions) == (9, 3, 2)


@given(instances)
def test_round_trip(inst):
    g, d = inst
    g2 = parse_game(serialize_game(g))
    assert g2 == g
    d2 = parse_advice(serialize_advice(d, g), g2)
    assert advice_to_dict(d2, g2) == advice_to_dict(d, g)
    assert game_to_dict(g2) == game_to_dict(g)


@given(instances)
def test_advice_rows_sum_to_one(inst):
    g, d = inst
    for q in g.states:
        assert sum(p for _, p in d.rows(q)) == 1
        assert all(p > 0 for _, p in d.rows(q))
    for dist in g.transitions.values():
        assert sum(dist.values()) == 1
