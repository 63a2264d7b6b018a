from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given

from ceverify import fixtures as fx
from ceverify.chains import forward_reachable, relevant_states
from ceverify.mdp import follow_advice_policy, policy_value
from ceverify.model import make_advice, make_game
from ceverify.product import Advised, build_mdp, marginal
from ceverify.verify import INITIAL_STATE, ONE_STEP, DeviationWitness, Verdict, verify_all, verify_ce, verify_spce

from conftest import instances


def test_verdict_invariant():
    w = DeviationWitness("p", "q", "a", "b", Fraction(0), Fraction(1), ONE_STEP)
    with pytest.raises(ValueError):
        Verdict(True, w)
    with pytest.raises(ValueError):
        Verdict(False)


def test_chicken():
    g = fx.chicken()
    assert verify_ce(g, fx.chicken_uniform(g)).holds
    v = verify_ce(g, fx.chicken_advice(g, {("D", "D"): 1}))
    assert not v.holds
    assert v.witness == DeviationWitness("row", "play", "D", "C", Fraction(0), Fraction(2, 7), INITIAL_STATE)


def test_market_entry():
    g = fx.market_entry()
    exit_fight = fx.market_entry_advice(g, "exit", "fight")
    enter_pass = fx.market_entry_advice(g, "enter", "pass")
    assert verify_ce(g, exit_fight).holds
    v = verify_spce(g, exit_fight)
    assert not v.holds
    assert v.witness == DeviationWitness("2", "p2", "fight", "pass", Fraction(0), Fraction(2, 5), ONE_STEP)
    assert verify_ce(g, enter_pass).holds and verify_spce(g, enter_pass).holds
    r = verify_all(g, exit_fight)
    assert r.ce.holds and not r.spce.holds and r.seconds_ce >= 0


def test_single_action_game():
    g = make_game(["q"], "q", ["p"], ["a"], {("q", "p"): ["a"]}, {("q", ("a",)): {"q": 1}}, {"p": []})
    d = make_advice(g, {"q": {"a": 1}})
    assert verify_ce(g, d).holds and verify_spce(g, d).holds


def test_discontinuity():
    g = fx.discontinuity()
    assert verify_ce(g, fx.discontinuity_advice(g, Fraction(1, 2))).holds
    v = verify_ce(g, fx.discontinuity_advice(g, 0))
    assert v.witness == DeviationWitness("agent", "q0", "a", "b", Fraction(0), Fraction(1), INITIAL_STATE)


def test_three_players():
    g = fx.three_players()
    d = fx.three_players_advice(g)
    v = verify_ce(g, d)
    # player 1 is told a when the others play ab; switching to b wins
    assert not v.holds and v.witness.player == "1"


def test_parallel_matches_serial():
    g = fx.market_entry()
    d = fx.market_entry_advice(g, "exit", "fight")
    assert verify_spce(g, d, jobs=2) == verify_spce(g, d)
    assert verify_ce(g, d, jobs=2) == verify_ce(g, d)


def _check_witness(g, d, w):
    assert w.value_deviating > w.value_following
    assert w.alternative in g.available(w.state, w.player)
    assert marginal(d, g, w.state, w.player, w.recommended) > 0
    if w.kind == ONE_STEP:
        assert w.state in relevant_states(g, w.player)
        mdp = build_mdp(g, d, w.player)
        pol = follow_advice_policy(mdp)
        pol[Advised(w.state, w.recommended)] = w.alternative
        v = policy_value(mdp, pol)
        assert v[Advised(w.state, w.recommended)] > w.value_following


@given(instances)
def test_verdict_properties(inst):
    g, d = inst
    ce, spce = verify_ce(g, d), verify_spce(g, d)
    if spce.holds:
        assert ce.holds
    for v in (ce, spce):
        if not v.holds:
            _check_witness(g, d, v.witness)


@given(instances)
def test_unreachable_goal_states_are_irrelevant(inst):
    g, d = inst
    edges = {q: {q2: 1 for q2 in g.successors(q)} for q in g.states}
    unreachable = set(g.states) - forward_reachable(edges, [g.initial])
    if not unreachable:
        return
    goals = {p: g.goals[p] | unreachable for p in g.players}
    g2 = replace(g, goals=goals)
    assert verify_ce(g2, d).holds == verify_ce(g, d).holds
    assert verify_spce(g2, d).holds == verify_spce(g, d).holds
