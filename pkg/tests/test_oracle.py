import random
from fractions import Fraction

import pytest
from hypothesis import given

from ceverify import fixtures as fx
from ceverify import oracle
from ceverify.chains import payoff_under_advice
from ceverify.mdp import follow_advice_policy, policy_value
from ceverify.model import make_advice, make_game
from ceverify.product import Plain, build_mdp
from ceverify.verify import verify_ce, verify_spce

from conftest import instances


def one_choice_game():
    g = make_game(
        ["s", "goal", "sink"], "s", ["p"], ["a", "b"],
        {(q, "p"): ["a", "b"] if q == "s" else ["a"] for q in ["s", "goal", "sink"]},
        {("s", ("a",)): {"goal": "1/3", "sink": "2/3"}, ("s", ("b",)): {"goal": "3/4", "sink": "1/4"},
         ("goal", ("a",)): {"goal": 1}, ("sink", ("a",)): {"sink": 1}},
        {"p": ["goal"]},
    )
    return g, make_advice(g, {"s": {"a": 1}, "goal": {"a": 1}, "sink": {"a": 1}})


def test_enumerate_single_choice():
    g, d = one_choice_game()
    value, policy = oracle.enumerate_policies(build_mdp(g, d, "p"))
    assert value == Fraction(3, 4)


def test_enumerate_discontinuity():
    g = fx.discontinuity()
    value, _ = oracle.enumerate_policies(build_mdp(g, fx.discontinuity_advice(g, 0), "agent"))
    assert value == 1


def test_cap(monkeypatch):
    g, d = one_choice_game()
    mdp = build_mdp(g, d, "p")
    with pytest.raises(oracle.CapExceeded):
        oracle.enumerate_policies(mdp, cap=1)
    monkeypatch.setenv(oracle.CAP_ENV, "1")
    with pytest.raises(oracle.CapExceeded):
        oracle.enumerate_policies(mdp)
    with pytest.raises(oracle.CapExceeded):
        oracle.brute_force_ce(g, d)


def test_gauss_jordan():
    a = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    assert oracle.gauss_jordan(a, [Fraction(3), Fraction(5)]) == [Fraction(4, 5), Fraction(7, 5)]


def test_brute_force_market_entry():
    g = fx.market_entry()
    ef = fx.market_entry_advice(g, "exit", "fight")
    ep = fx.market_entry_advice(g, "enter", "pass")
    assert oracle.brute_force_ce(g, ef).holds and oracle.brute_force_ce(g, ep).holds
    v = oracle.brute_force_spce(g, ef)
    assert (v.holds, v.player, v.state, v.value_best) == (False, "2", "p2", Fraction(2, 5))
    assert oracle.brute_force_spce(g, ep).holds


def test_brute_force_trivial():
    g = make_game(["q"], "q", ["p"], ["a"], {("q", "p"): ["a"]}, {("q", ("a",)): {"q": 1}}, {"p": []})
    d = make_advice(g, {"q": {"a": 1}})
    assert oracle.brute_force_spce(g, d).holds


@given(instances)
def test_oracle_agreement(inst):
    g, d = inst
    assert oracle.brute_force_ce(g, d).holds == verify_ce(g, d).holds
    assert oracle.brute_force_spce(g, d).holds == verify_spce(g, d).holds
    for p in g.players:
        mdp = build_mdp(g, d, p)
        value, _ = oracle.enumerate_policies(mdp)
        follow = policy_value(mdp, follow_advice_policy(mdp))
        assert value >= follow[mdp.initial]
        f, best = oracle.brute_force_values(g, d, p)
        assert f[g.initial] == payoff_under_advice(g, d, p, g.initial)
        assert best[g.initial] == value


def test_simulate_start_in_goal():
    g = fx.chicken()
    d = fx.chicken_uniform(g)
    for seed in range(3):
        r = oracle.simulate(g, d, "row", "W12", trials=100, horizon=1, seed=seed)
        assert r.estimate == 1


def test_simulate_half():
    g = make_game(
        ["s", "goal", "sink"], "s", ["p"], ["a"],
        {(q, "p"): ["a"] for q in ["s", "goal", "sink"]},
        {("s", ("a",)): {"goal": "1/3", "sink": "1/3", "s": "1/3"},
         ("goal", ("a",)): {"goal": 1}, ("sink", ("a",)): {"sink": 1}},
        {"p": ["goal"]},
    )
    d = make_advice(g, {q: {"a": 1} for q in g.states})
    r = oracle.simulate(g, d, "p", trials=100_000, horizon=200, seed=2024)
    assert abs(r.estimate - 0.5) < 0.01
    assert oracle.truncation_bound(g, d, "p", "s", 200) < 1e-30


def test_simulate_reproducible_and_monotone():
    g = fx.chicken()
    d = fx.chicken_uniform(g)
    a = oracle.simulate(g, d, "col", trials=30_000, horizon=5, seed=9)
    assert a == oracle.simulate(g, d, "col", trials=30_000, horizon=5, seed=9)
    g = fx.discontinuity()
    d = fx.discontinuity_advice(g, Fraction(1, 10))
    hits = [oracle.simulate(g, d, "agent", trials=20_000, horizon=h, seed=1).hits for h in (1, 2, 5, 20, 100)]
    assert hits == sorted(hits)


def test_simulation_report_invariant():
    with pytest.raises(ValueError):
        oracle.SimulationReport(10, 11, 1.1, 0.0, 0, 1)
    with pytest.raises(ValueError):
        oracle.simulate(*one_choice_game(), "p", trials=0)


@given(instances)
def test_random_instances_are_small(inst):
    g, d = inst
    assert len(g.states) <= 4 and len(g.players) == 2
    for (q, p), acts in g.availability.items():
        assert 1 <= len(acts) <= 2
    for rows in d.table.values():
        assert all(p.denominator <= 8 for _, p in rows)


def test_random_net_size():
    import math
    for seed in range(50):
        net = oracle.random_net(random.Random(seed))
        assert sum(math.log2(len(net.domains[v])) for v in net.vertices) <= 16
