"""Decide whether advice is a correlated equilibrium (CE) or a subgame-perfect
correlated equilibrium (SPCE), with a deviation witness when it is not."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .chains import forward_reachable, hitting, payoff_under_advice, relevant_states
from .mdp import follow_advice_policy, policy_value, q_value, solve_mdp
from .model import ControllerAdvice, Game
from .product import Advised, Plain, build_chain, build_mdp, induced_chain

INITIAL_STATE = "initial-state"
ONE_STEP = "one-step"


@dataclass(frozen=True)
class DeviationWitness:
    player: str
    state: str
    recommended: str
    alternative: str
    value_following: Fraction
    value_deviating: Fraction
    kind: str


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Optional[DeviationWitness] = None

    def __post_init__(self):
        if self.holds == (self.witness is not None):
            raise ValueError("a verdict carries a witness exactly when it fails")


def _ce_player(g: Game, d: ControllerAdvice, player: str) -> Optional[DeviationWitness]:
    if g.initial in g.goals[player]:
        return None
    v_follow = payoff_under_advice(g, d, player, g.initial)
    mdp = build_mdp(g, d, player)
    start = Plain(g.initial)
    sol = solve_mdp(mdp, start)
    v_best = sol.values[start]
    assert v_best >= v_follow, "optimal value below the value of following the advice"
    if v_best == v_follow:
        return None

    # locate where the optimal policy departs from the advice on its own path
    h_follow = hitting(build_chain(g, d, player))
    on_path = forward_reachable(induced_chain(mdp, sol.policy).edges, [start])
    departures = [
        s for s in mdp.states
        if isinstance(s, Advised) and s in on_path and s not in mdp.goal
        and sol.policy[s] != s.action
    ]
    improving = [s for s in departures if q_value(mdp, h_follow, s, sol.policy[s]) > h_follow[s]]
    s = (improving or departures)[0]
    return DeviationWitness(
        player, s.state, s.action, sol.policy[s], v_follow, v_best, INITIAL_STATE
    )


def _spce_player(g: Game, d: ControllerAdvice, player: str) -> Optional[DeviationWitness]:
    relevant = relevant_states(g, player)
    if not relevant:
        return None
    mdp = build_mdp(g, d, player)
    h = hitting(build_chain(g, d, player))
    for q in relevant:
        for a in g.actions:
            s = Advised(q, a)
            if s not in mdp.kernel:
                continue
            for b in g.available(q, player):
                if b == a:
                    continue
                v_dev = q_value(mdp, h, s, b)
                if v_dev > h[s]:
                    # re-solve the chain with the single switch applied
                    policy = follow_advice_policy(mdp)
                    policy[s] = b
                    switched = policy_value(mdp, policy)
                    assert switched[s] > h[s], f"one-step deviation at {s.label()} did not improve"
                    assert switched[Plain(q)] > h[Plain(q)]
                    return DeviationWitness(player, q, a, b, h[s], v_dev, ONE_STEP)
    return None


def _run(check, g, d, jobs):
    if jobs > 1 and len(g.players) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(check, [g] * len(g.players), [d] * len(g.players), g.players))
    else:
        found = [check(g, d, p) for p in g.players]
    for w in found:
        if w is not None:
            return Verdict(False, w)
    return Verdict(True)


def verify_ce(g: Game, d: ControllerAdvice, jobs: int = 1) -> Verdict:
    return _run(_ce_player, g, d, jobs)


def verify_spce(g: Game, d: ControllerAdvice, jobs: int = 1) -> Verdict:
    return _run(_spce_player, g, d, jobs)


@dataclass(frozen=True)
class Report:
    ce: Verdict
    spce: Verdict
    seconds_ce: float
    seconds_spce: float


def verify_all(g: Game, d: ControllerAdvice, jobs: int = 1) -> Report:
    t0 = time.perf_counter()
    ce = verify_ce(g, d, jobs)
    t1 = time.perf_counter()
    spce = verify_spce(g, d, jobs)
    t2 = time.perf_counter()
    return Report(ce, spce, t1 - t0, t2 - t1)
