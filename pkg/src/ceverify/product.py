"""The chain of a game under full compliance with advice, and the MDP in which
one player may deviate.

Both live on the state space ``Q ∪ (Q × A_i)``: a :class:`Plain` state waits
for a recommendation, an :class:`Advised` state knows the action recommended to
the fixed player. Plain states move to Advised states with the marginal
probability of the recommendation; Advised states move back to Plain states by
conditioning the advice table on that recommendation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .model import ZERO, ControllerAdvice, Game, ModelError, format_rational


@dataclass(frozen=True)
class Plain:
    state: str

    def label(self) -> str:
        return f"[{self.state}]"


@dataclass(frozen=True)
class Advised:
    state: str
    action: str

    def label(self) -> str:
        return f"[{self.state}|{self.action}]"


ProductState = Union[Plain, Advised]
Distribution = dict  # ProductState -> Fraction


@dataclass(frozen=True)
class ProductChain:
    player: str
    states: tuple  # ProductState, Plain states first in game order
    edges: dict  # ProductState -> {ProductState: Fraction}
    initial: Plain
    goal: frozenset

    def successors(self, s) -> dict:
        return self.edges.get(s, {})


@dataclass(frozen=True)
class DeviationMdp:
    player: str
    states: tuple
    plain_edges: dict  # Plain -> {Advised: Fraction}
    # Advised -> {legal action: {Plain: Fraction}}
    kernel: dict
    initial: Plain
    goal: frozenset
    actions: tuple  # the deviating player's action ids, game order

    def legal(self, s: Advised) -> tuple[str, ...]:
        return tuple(self.kernel[s])


class ConditioningError(ModelError):
    """Conditioning on a recommendation that has probability zero."""


def marginal(d: ControllerAdvice, g: Game, q: str, player: str, a: str) -> Fraction:
    """Probability that the advice at ``q`` recommends ``a`` to ``player``."""
    if q not in g.states:
        raise ModelError(f"unknown state {q!r}")
    k = g.player_index(player)
    return sum((pr for joint, pr in d.rows(q) if joint[k] == a), ZERO)


def _substitute(joint: tuple, k: int, a: str) -> tuple:
    return joint[:k] + (a,) + joint[k + 1 :]


def _conditional_mixture(g, d, player, q, a, chosen) -> dict:
    k = g.player_index(player)
    if chosen not in g.available(q, player):
        raise ModelError(f"action {chosen!r} is forbidden for player {player!r} at state {q!r}")
    weight = ZERO
    acc: dict[str, Fraction] = {}
    for joint, pr in d.rows(q):
        if joint[k] != a:
            continue
        weight += pr
        for q2, t in g.delta(q, _substitute(joint, k, chosen)).items():
            acc[q2] = acc.get(q2, ZERO) + pr * t
    if weight == 0:
        raise ConditioningError(
            f"player {player!r} is never recommended {a!r} at state {q!r}"
        )
    return {Plain(q2): v / weight for q2, v in acc.items() if v}


def chain_step(g: Game, d: ControllerAdvice, player: str, source) -> dict:
    if isinstance(source, Plain):
        q = source.state
        out = {}
        for a in g.actions:
            p = marginal(d, g, q, player, a)
            if p:
                out[Advised(q, a)] = p
        return out
    return _conditional_mixture(g, d, player, source.state, source.action, source.action)


def mdp_step(g: Game, d: ControllerAdvice, player: str, source: Advised, chosen: str) -> dict:
    return _conditional_mixture(g, d, player, source.state, source.action, chosen)


def _product_states(g, d, player):
    plain = [Plain(q) for q in g.states]
    advised = []
    for q in g.states:
        for a in g.actions:
            if marginal(d, g, q, player, a):
                advised.append(Advised(q, a))
    return plain, advised


def _goal(g, player, states):
    goal_q = g.goals[player]
    return frozenset(s for s in states if s.state in goal_q)


def build_chain(g: Game, d: ControllerAdvice, player: str) -> ProductChain:
    g.player_index(player)
    plain, advised = _product_states(g, d, player)
    states = tuple(plain + advised)
    edges = {s: chain_step(g, d, player, s) for s in states}
    return ProductChain(player, states, edges, Plain(g.initial), _goal(g, player, states))


def build_mdp(g: Game, d: ControllerAdvice, player: str) -> DeviationMdp:
    g.player_index(player)
    plain, advised = _product_states(g, d, player)
    states = tuple(plain + advised)
    plain_edges = {s: chain_step(g, d, player, s) for s in plain}
    kernel = {
        s: {b: mdp_step(g, d, player, s, b) for b in g.available(s.state, player)}
        for s in advised
    }
    return DeviationMdp(
        player, states, plain_edges, kernel, Plain(g.initial), _goal(g, player, states), g.actions
    )


def induced_chain(mdp: DeviationMdp, policy: dict) -> ProductChain:
    """The chain obtained by fixing ``policy`` at every Advised state."""
    edges = dict(mdp.plain_edges)
    for s, by_action in mdp.kernel.items():
        b = policy.get(s)
        if b is None:
            raise ModelError(f"policy undefined at {s.label()}")
        if b not in by_action:
            raise ModelError(f"policy chooses illegal action {b!r} at {s.label()}")
        edges[s] = by_action[b]
    return ProductChain(mdp.player, mdp.states, edges, mdp.initial, mdp.goal)


def product_as_game_dict(obj) -> dict:
    """Dump a chain or deviation MDP as a one-player game document.

    The single player ``agent`` chooses at Advised states of an MDP; every
    other state offers the single action ``-``.
    """
    if isinstance(obj, DeviationMdp):
        acts = list(obj.actions)
        controlled = obj.kernel
        edges = obj.plain_edges
    else:
        acts = []
        controlled = {}
        edges = obj.edges
    all_actions = ["-"] + acts
    availability = {}
    transitions = []
    for s in obj.states:
        if s in controlled:
            legal = list(controlled[s])
            availability[s.label()] = {"agent": legal}
            for b in legal:
                transitions.append(
                    {
                        "state": s.label(),
                        "joint": [b],
                        "to": {t.label(): format_rational(p) for t, p in controlled[s][b].items()},
                    }
                )
        else:
            availability[s.label()] = {"agent": ["-"]}
            transitions.append(
                {
                    "state": s.label(),
                    "joint": ["-"],
                    "to": {t.label(): format_rational(p) for t, p in edges[s].items()},
                }
            )
    return {
        "states": [s.label() for s in obj.states],
        "initial": obj.initial.label(),
        "players": ["agent"],
        "actions": all_actions,
        "availability": availability,
        "transitions": transitions,
        "goals": {"agent": [s.label() for s in obj.states if s in obj.goal]},
    }
