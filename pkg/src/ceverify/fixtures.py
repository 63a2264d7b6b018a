"""Small games used throughout the tests, scripts and docs.

Matrix and tree games with arbitrary payoffs are turned into reachability
games: each player's payoffs are mapped affinely into [0, 1], and an outcome
becomes a lottery over terminal states. The lottery is comonotone (both players
win together as often as possible), which fixes each player's marginal winning
probability at the rescaled payoff.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from . import bayesnet as bn
from .chains import payoff_under_advice
from .model import ControllerAdvice, Game, make_advice, make_game
from .oracle import random_instance

WAIT = "wait"


def _outcome_lottery(p1: Fraction, p2: Fraction) -> dict[str, Fraction]:
    both = min(p1, p2)
    out = {"W12": both, "W1": p1 - both, "W2": p2 - both, "W0": 1 - max(p1, p2)}
    return {q: p for q, p in out.items() if p}


TERMINALS = ("W12", "W1", "W2", "W0")


def _terminal_goals(players):
    p1, p2 = players
    return {p1: {"W12", "W1"}, p2: {"W12", "W2"}}


def chicken() -> Game:
    """The Chicken game with payoffs rescaled by 1/7 for both players."""
    payoff = {
        ("C", "C"): (6, 6),
        ("C", "D"): (2, 7),
        ("D", "C"): (7, 2),
        ("D", "D"): (0, 0),
    }
    players = ("row", "col")
    states = ("play",) + TERMINALS
    availability = {("play", p): ("C", "D") for p in players}
    availability.update({(t, p): (WAIT,) for t in TERMINALS for p in players})
    transitions = {
        ("play", joint): _outcome_lottery(Fraction(u, 7), Fraction(v, 7))
        for joint, (u, v) in payoff.items()
    }
    transitions.update({(t, (WAIT, WAIT)): {t: 1} for t in TERMINALS})
    return make_game(
        states, "play", players, ("C", "D", WAIT), availability, transitions,
        _terminal_goals(players),
    )


def chicken_advice(g: Game, table: dict) -> ControllerAdvice:
    full = {"play": table}
    full.update({t: {(WAIT, WAIT): 1} for t in TERMINALS})
    return make_advice(g, full)


def chicken_uniform(g: Game) -> ControllerAdvice:
    """Each of CC, CD, DC with probability 1/3."""
    third = Fraction(1, 3)
    return chicken_advice(g, {("C", "C"): third, ("C", "D"): third, ("D", "C"): third})


def market_entry() -> Game:
    """Entry game: the entrant's payoffs map by (p+5)/7, the incumbent's by (p+3)/5.

    Player ``1`` moves at ``p1`` (enter/exit), player ``2`` at ``p2`` (fight/pass).
    """
    players = ("1", "2")
    lottery = {
        "exit": _outcome_lottery(Fraction(5, 7), Fraction(3, 5)),  # (0, 0)
        "fight": _outcome_lottery(Fraction(0), Fraction(0)),  # (-5, -3)
        "pass": _outcome_lottery(Fraction(1), Fraction(2, 5)),  # (2, -1)
    }
    states = ("p1", "p2") + TERMINALS
    availability = {
        ("p1", "1"): ("enter", "exit"), ("p1", "2"): (WAIT,),
        ("p2", "1"): (WAIT,), ("p2", "2"): ("fight", "pass"),
    }
    availability.update({(t, p): (WAIT,) for t in TERMINALS for p in players})
    transitions = {
        ("p1", ("enter", WAIT)): {"p2": 1},
        ("p1", ("exit", WAIT)): lottery["exit"],
        ("p2", (WAIT, "fight")): lottery["fight"],
        ("p2", (WAIT, "pass")): lottery["pass"],
    }
    transitions.update({(t, (WAIT, WAIT)): {t: 1} for t in TERMINALS})
    return make_game(
        states, "p1", players, ("enter", "exit", "fight", "pass", WAIT),
        availability, transitions, _terminal_goals(players),
    )


def market_entry_advice(g: Game, first: str, second: str) -> ControllerAdvice:
    table = {
        "p1": {(first, WAIT): 1},
        "p2": {(WAIT, second): 1},
    }
    table.update({t: {(WAIT, WAIT): 1} for t in TERMINALS})
    return make_advice(g, table)


def discontinuity() -> Game:
    """One agent: ``a`` loops at ``q0``, ``b`` moves to the goal ``q1``."""
    return make_game(
        ("q0", "q1"), "q0", ("agent",), ("a", "b"),
        {("q0", "agent"): ("a", "b"), ("q1", "agent"): ("a", "b")},
        {
            ("q0", ("a",)): {"q0": 1},
            ("q0", ("b",)): {"q1": 1},
            ("q1", ("a",)): {"q1": 1},
            ("q1", ("b",)): {"q1": 1},
        },
        {"agent": {"q1"}},
    )


def discontinuity_advice(g: Game, p_b: Fraction) -> ControllerAdvice:
    p_b = Fraction(p_b)
    return make_advice(g, {"q0": {("a",): 1 - p_b, ("b",): p_b}, "q1": {("a",): 1}})


def three_players() -> Game:
    """One decision state ``q``; every joint action leads to its own sink."""
    players = ("1", "2", "3")
    joints = ["".join(j) for j in itertools.product("ab", repeat=3)]
    states = ("q",) + tuple(f"t_{j}" for j in joints)
    availability = {(q, p): ("a", "b") for q in states for p in players}
    transitions = {}
    for q in states:
        for j in itertools.product("ab", repeat=3):
            transitions[(q, j)] = {f"t_{''.join(j)}": 1} if q == "q" else {q: 1}
    goals = {p: {f"t_{j}" for j in joints if j[k] == "b"} for k, p in enumerate(players)}
    return make_game(states, "q", players, ("a", "b"), availability, transitions, goals)


def three_players_advice(g: Game) -> ControllerAdvice:
    """``{aab: 1/2, bbb: 1/2}`` at ``q``; sinks recommend ``aaa``."""
    table = {q: {"aaa": 1} for q in g.states}
    table["q"] = {"aab": "1/2", "bbb": "1/2"}
    return make_advice(g, table)


# ---------------------------------------------------------------------------
# network-encoded models


AB = ("a", "b")
_COPY = {(x,): {x: Fraction(1)} for x in AB}
_XOR = {(x, y): {"b" if x != y else "a": Fraction(1)} for x in AB for y in AB}


def _xor_tree(leaves, prefix, vertices, domains, parents, theta):
    """Pairwise XOR vertices over ``leaves``; returns the root vertex."""
    layer, n = list(leaves), 0
    while len(layer) > 1:
        nxt = []
        for k in range(0, len(layer) - 1, 2):
            n += 1
            v = f"{prefix}{n}"
            vertices.append(v)
            domains[v] = AB
            parents[v] = (layer[k], layer[k + 1])
            theta[v] = bn.Cpt(_XOR)
            nxt.append(v)
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def xor_players(k: int) -> tuple:
    return tuple(str(n) for n in range(1, 2 * k + 2))


def xor_advice_net(k: int) -> bn.AdviceNet:
    """Players 1..k uniform, k+1..2k copy them, 2k+1 gets the XOR of the copies."""
    vertices, domains, parents, theta = [], {}, {}, {}
    half = Fraction(1, 2)
    for n in range(1, k + 1):
        v = f"A{n}"
        vertices.append(v)
        domains[v], parents[v], theta[v] = AB, (), bn.Prior({"a": half, "b": half})
    for n in range(1, k + 1):
        v = f"A{k + n}"
        vertices.append(v)
        domains[v], parents[v], theta[v] = AB, (f"A{n}",), bn.Cpt(_COPY)
    root = _xor_tree([f"A{k + n}" for n in range(1, k + 1)], "X", vertices, domains, parents, theta)
    last = f"A{2 * k + 1}"
    vertices.append(last)
    domains[last], parents[last], theta[last] = AB, (root,), bn.Cpt(_COPY)
    net = bn.BayesNet(tuple(vertices), domains, parents, theta)
    return bn.AdviceNet(net, {p: f"A{p}" for p in xor_players(k)})


def _dirac_advice(players, action) -> bn.AdviceNet:
    net = bn.BayesNet(
        tuple(f"A{p}" for p in players),
        {f"A{p}": (action,) for p in players},
        {},
        {f"A{p}": bn.Prior({action: Fraction(1)}) for p in players},
    )
    return bn.AdviceNet(net, {p: f"A{p}" for p in players})


def _sink_net(players, domains, states, here) -> bn.TransitionNet:
    vertices = [f"I{p}" for p in players] + [f"o:{q}" for q in states]
    dom = {f"I{p}": tuple(domains[p]) for p in players}
    dom.update({f"o:{q}": bn.BOOL for q in states})
    theta = {f"I{p}": bn.Input() for p in players}
    theta.update({f"o:{q}": bn.Prior({bn.TRUE if q == here else bn.FALSE: Fraction(1)}) for q in states})
    net = bn.BayesNet(tuple(vertices), dom, {}, theta)
    return bn.TransitionNet(net, {p: f"I{p}" for p in players}, {q: f"o:{q}" for q in states})


XOR_STATES = ("s", "good", "bad")


def xor_model(k: int, contrarian: bool = False):
    """One decision state: the play goes to ``good`` when the last player's
    action equals the XOR of the first k players' actions, else to ``bad``.
    Everyone wants ``good``, except player 1 when ``contrarian``."""
    players = xor_players(k)
    last = players[-1]
    vertices = [f"I{p}" for p in players]
    domains = {f"I{p}": AB for p in players}
    parents = {}
    theta = {f"I{p}": bn.Input() for p in players}
    root = _xor_tree([f"I{n}" for n in range(1, k + 1)], "X", vertices, domains, parents, theta)
    vertices.append("match")
    domains["match"] = bn.BOOL
    parents["match"] = (root, f"I{last}")
    theta["match"] = bn.Cpt({
        (x, y): {bn.TRUE if x == y else bn.FALSE: Fraction(1)} for x in AB for y in AB
    })
    flip = {(x,): {(bn.FALSE if x == bn.TRUE else bn.TRUE): Fraction(1)} for x in bn.BOOL}
    same = {(x,): {x: Fraction(1)} for x in bn.BOOL}
    for q, table in (("good", same), ("bad", flip)):
        v = f"o:{q}"
        vertices.append(v)
        domains[v], parents[v], theta[v] = bn.BOOL, ("match",), bn.Cpt(table)
    vertices.append("o:s")
    domains["o:s"], theta["o:s"] = bn.BOOL, bn.Prior({bn.FALSE: Fraction(1)})
    net = bn.BayesNet(tuple(vertices), domains, parents, theta)
    trans = {"s": bn.TransitionNet(net, {p: f"I{p}" for p in players}, {q: f"o:{q}" for q in XOR_STATES})}
    doms = {p: AB for p in players}
    for q in ("good", "bad"):
        trans[q] = _sink_net(players, doms, XOR_STATES, q)
    advice = {"s": xor_advice_net(k), "good": _dirac_advice(players, "a"), "bad": _dirac_advice(players, "a")}
    goals = {p: frozenset({"good"}) for p in players}
    if contrarian:
        goals[players[0]] = frozenset({"bad"})
    skeleton = bn.Skeleton(
        XOR_STATES, "s", players, AB,
        {(q, p): AB for q in XOR_STATES for p in players}, goals,
    )
    return skeleton, advice, trans


def xor_explicit(k: int, contrarian: bool = False) -> tuple[Game, ControllerAdvice]:
    """The same model as :func:`xor_model`, written as explicit tables."""
    players = xor_players(k)
    transitions = {}
    for j in itertools.product(AB, repeat=len(players)):
        parity = sum(x == "b" for x in j[:k]) % 2
        ok = (j[-1] == "b") == bool(parity)
        transitions[("s", j)] = {"good" if ok else "bad": 1}
        for q in ("good", "bad"):
            transitions[(q, j)] = {q: 1}
    goals = {p: {"good"} for p in players}
    if contrarian:
        goals[players[0]] = {"bad"}
    g = make_game(
        XOR_STATES, "s", players, AB,
        {(q, p): AB for q in XOR_STATES for p in players}, transitions, goals,
    )
    rows = {}
    for first in itertools.product(AB, repeat=k):
        parity = sum(x == "b" for x in first) % 2
        rows[first + first + ("b" if parity else "a",)] = Fraction(1, 2**k)
    aaa = ("a",) * len(players)
    return g, make_advice(g, {"s": rows, "good": {aaa: 1}, "bad": {aaa: 1}})


CHICKEN_STATES = ("play",) + TERMINALS


def chicken_model(table: dict):
    """Chicken as networks. ``table`` maps (row, col) to a probability; the
    advice net factors it as P(row) * P(col | row)."""
    players = ("row", "col")
    table = {tuple(j): Fraction(p) for j, p in table.items()}
    p_row = {x: sum((p for j, p in table.items() if j[0] == x), Fraction(0)) for x in "CD"}
    cond = {}
    for x in "CD":
        if p_row[x]:
            cond[(x,)] = {y: table.get((x, y), Fraction(0)) / p_row[x] for y in "CD"}
        else:
            cond[(x,)] = {"C": Fraction(1)}  # never recommended; any row will do
    adv = bn.BayesNet(
        ("Arow", "Acol"), {"Arow": ("C", "D"), "Acol": ("C", "D")},
        {"Acol": ("Arow",)},
        {"Arow": bn.Prior(p_row), "Acol": bn.Cpt(cond)},
    )
    advice = {"play": bn.AdviceNet(adv, {"row": "Arow", "col": "Acol"})}

    # the transition net computes the outcome lottery from the payoff matrix
    payoff = {("C", "C"): (6, 6), ("C", "D"): (2, 7), ("D", "C"): (7, 2), ("D", "D"): (0, 0)}
    outcome = {
        j: {t: _outcome_lottery(Fraction(u, 7), Fraction(v, 7)).get(t, Fraction(0)) for t in TERMINALS}
        for j, (u, v) in payoff.items()
    }
    vertices = ("Irow", "Icol", "outcome") + tuple(f"o:{q}" for q in CHICKEN_STATES)
    domains = {"Irow": ("C", "D"), "Icol": ("C", "D"), "outcome": TERMINALS}
    domains.update({f"o:{q}": bn.BOOL for q in CHICKEN_STATES})
    parents = {"outcome": ("Irow", "Icol")}
    theta = {"Irow": bn.Input(), "Icol": bn.Input(), "outcome": bn.Cpt(outcome)}
    theta["o:play"] = bn.Prior({bn.FALSE: Fraction(1)})
    for t in TERMINALS:
        parents[f"o:{t}"] = ("outcome",)
        theta[f"o:{t}"] = bn.Cpt({(x,): {bn.TRUE if x == t else bn.FALSE: Fraction(1)} for x in TERMINALS})
    net = bn.BayesNet(vertices, domains, parents, theta)
    trans = {"play": bn.TransitionNet(net, {"row": "Irow", "col": "Icol"}, {q: f"o:{q}" for q in CHICKEN_STATES})}
    waits = {p: (WAIT,) for p in players}
    for t in TERMINALS:
        trans[t] = _sink_net(players, waits, CHICKEN_STATES, t)
        advice[t] = _dirac_advice(players, WAIT)
    availability = {("play", p): ("C", "D") for p in players}
    availability.update({(t, p): (WAIT,) for t in TERMINALS for p in players})
    skeleton = bn.Skeleton(
        CHICKEN_STATES, "play", players, ("C", "D", WAIT), availability,
        {p: frozenset(q) for p, q in _terminal_goals(players).items()},
    )
    return skeleton, advice, trans


# ---------------------------------------------------------------------------
# simulation cross-check cases


def half_chain():
    """``s`` moves to the goal, a sink, or itself, each with probability 1/3."""
    g = make_game(
        ["s", "goal", "sink"], "s", ["p"], ["a"],
        {(q, "p"): ["a"] for q in ["s", "goal", "sink"]},
        {("s", ("a",)): {"goal": "1/3", "sink": "1/3", "s": "1/3"},
         ("goal", ("a",)): {"goal": 1}, ("sink", ("a",)): {"sink": 1}},
        {"p": ["goal"]},
    )
    return g, make_advice(g, {q: {"a": 1} for q in g.states})


def simulation_fixtures():
    """Twenty (name, game, advice, player) cases with exact payoffs strictly
    known; the tail is random games whose payoff lies strictly inside (0, 1)."""
    out = []
    g = chicken()
    for name, d in (
        ("uniform", chicken_uniform(g)),
        ("skewed", chicken_advice(g, {("C", "C"): "1/2", ("D", "C"): "1/4", ("C", "D"): "1/4"})),
    ):
        out += [(f"chicken-{name}-{p}", g, d, p) for p in g.players]
    g = market_entry()
    for first, second in (("exit", "fight"), ("enter", "pass")):
        d = market_entry_advice(g, first, second)
        out += [(f"market-entry-{first}-{second}-{p}", g, d, p) for p in g.players]
    g = discontinuity()
    out += [(f"discontinuity-{p}", g, discontinuity_advice(g, Fraction(p)), "agent") for p in ("1/2", "1/10")]
    out.append(("half-chain", *half_chain(), "p"))
    rng = random.Random(99)
    while len(out) < 20:
        g, d = random_instance(rng)
        for p in g.players:
            v = payoff_under_advice(g, d, p, g.initial)
            if 0 < v < 1 and len(out) < 20:
                out.append((f"random-{len(out)}-{p}", g, d, p))
    return out
