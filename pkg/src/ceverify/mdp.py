"""Exact maximal reachability in the deviation MDP by policy iteration."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chains import backward_reachable, forward_reachable, hitting
from .model import ZERO, ModelError
from .product import Advised, DeviationMdp, induced_chain


@dataclass(frozen=True)
class MdpSolution:
    values: dict  # ProductState -> Fraction, states reachable from the anchor
    policy: dict  # Advised -> action
    iterations: int


def follow_advice_policy(mdp: DeviationMdp) -> dict:
    return {s: s.action for s in mdp.kernel}


def _all_edges(mdp: DeviationMdp) -> dict:
    """Union of edges over every action, for graph searches."""
    edges = dict(mdp.plain_edges)
    for s, by_action in mdp.kernel.items():
        row = {}
        for dist in by_action.values():
            row.update(dist)
        edges[s] = row
    return edges


def policy_value(mdp: DeviationMdp, policy: dict, anchor=None) -> dict:
    """Hitting vector of the chain induced by ``policy``."""
    return hitting(induced_chain(mdp, policy), anchor)


def q_value(mdp: DeviationMdp, h: dict, s: Advised, action: str) -> Fraction:
    try:
        dist = mdp.kernel[s][action]
    except KeyError:
        raise ModelError(f"action {action!r} is not legal at {s.label()}") from None
    return sum((p * h[t] for t, p in dist.items()), ZERO)


def zero_value_states(mdp: DeviationMdp) -> set:
    """States from which no policy reaches the goal with positive probability."""
    edges = _all_edges(mdp)
    return set(mdp.states) - backward_reachable(edges, mdp.goal)


def solve_mdp(mdp: DeviationMdp, anchor=None) -> MdpSolution:
    """Optimal values and an optimal policy.

    Starts from the policy that follows the advice. A state switches only on a
    strict Q-value improvement, to the improving action that comes first in the
    game's action order; ties keep the incumbent.
    """
    anchor = mdp.initial if anchor is None else anchor
    region = forward_reachable(_all_edges(mdp), [anchor])
    zero = zero_value_states(mdp)
    order = {a: k for k, a in enumerate(mdp.actions)}
    controlled = [
        s for s in mdp.states
        if isinstance(s, Advised) and s in region and s not in zero and s not in mdp.goal
    ]
    policy = follow_advice_policy(mdp)
    iterations = 0
    while True:
        iterations += 1
        h = policy_value(mdp, policy)
        changed = False
        for s in controlled:
            current = h[s]
            better = [
                b for b in mdp.kernel[s]
                if b != policy[s] and q_value(mdp, h, s, b) > current
            ]
            if better:
                policy[s] = min(better, key=order.__getitem__)
                changed = True
        if not changed:
            break
    values = {s: h[s] for s in mdp.states if s in region}
    return MdpSolution(values, policy, iterations)
