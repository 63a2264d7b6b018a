"""Hitting probabilities of product chains.

States are classified from the zero/positive pattern of the chain alone:
``win`` reaches the goal with probability one, ``lose`` with probability zero
(or is unreachable from the anchor). The remaining ``interior`` states form a
substochastic system in which every state can reach the consolidated target,
so ``(I - E') x = b`` has a unique solution.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from . import linalg
from .model import ONE, ZERO, ControllerAdvice, Game
from .product import Plain, ProductChain, build_chain

TARGET = "target"


@dataclass(frozen=True)
class Classification:
    win: frozenset
    lose: frozenset
    interior: tuple  # chain order
    anchor: object  # None: every state counts as reachable


@dataclass(frozen=True)
class PrunedChain:
    states: tuple  # interior states followed by TARGET
    # interior state -> {interior state or TARGET: Fraction}
    matrix: dict
    anchor: object


class DegenerateAnchor(Exception):
    """The anchor is already decided: its payoff is ``value``."""

    def __init__(self, value: Fraction):
        super().__init__(f"anchor is decided with payoff {value}")
        self.value = value


def forward_reachable(edges: dict, sources: Iterable) -> set:
    seen = set(sources)
    todo = deque(seen)
    while todo:
        s = todo.popleft()
        for t, p in edges.get(s, {}).items():
            if p and t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def backward_reachable(edges: dict, targets: Iterable, through: Optional[set] = None) -> set:
    """States with a positive path into ``targets``; intermediate states must
    lie in ``through`` when it is given."""
    preds: dict = {}
    for s, row in edges.items():
        if through is not None and s not in through:
            continue
        for t, p in row.items():
            if p:
                preds.setdefault(t, []).append(s)
    seen = set(targets)
    todo = deque(seen)
    while todo:
        t = todo.popleft()
        for s in preds.get(t, ()):
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return seen


def classify(chain: ProductChain, anchor=None) -> Classification:
    states = chain.states
    goal = chain.goal
    if anchor is not None and anchor not in chain.edges:
        raise KeyError(f"anchor {anchor} is not a chain state")
    reach = forward_reachable(chain.edges, [anchor]) if anchor is not None else set(states)
    can_hit = backward_reachable(chain.edges, goal)
    zero = {s for s in states if s not in can_hit}
    non_goal = {s for s in states if s not in goal}
    # reaching a zero state while avoiding the goal rules out probability one
    bad = backward_reachable(chain.edges, zero, through=non_goal)
    lose = frozenset(s for s in states if s not in goal and (s in zero or s not in reach))
    win = frozenset(s for s in states if s in goal or (s in reach and s not in bad))
    interior = tuple(s for s in states if s not in win and s not in lose)
    return Classification(win, lose, interior, anchor)


def _pruned_rows(chain: ProductChain, cls: Classification) -> dict:
    inside = set(cls.interior)
    rows = {}
    for s in cls.interior:
        row: dict = {}
        for t, p in chain.successors(s).items():
            if t in cls.win:
                row[TARGET] = row.get(TARGET, ZERO) + p
            elif t in inside:
                row[t] = row.get(t, ZERO) + p
        rows[s] = row
    return rows


def prune(chain: ProductChain, cls: Classification) -> PrunedChain:
    if cls.anchor is not None:
        if cls.anchor in cls.win:
            raise DegenerateAnchor(ONE)
        if cls.anchor in cls.lose:
            raise DegenerateAnchor(ZERO)
    rows = _pruned_rows(chain, cls)
    return PrunedChain(cls.interior + (TARGET,), rows, cls.anchor)


def solve_pruned(rows: dict, interior: tuple) -> dict:
    index = {s: k for k, s in enumerate(interior)}
    n = len(interior)
    a = [[ZERO] * n for _ in range(n)]
    b = [ZERO] * n
    for s, k in index.items():
        a[k][k] = ONE
        for t, p in rows[s].items():
            if t == TARGET:
                b[k] += p
            else:
                a[k][index[t]] -= p
    x = linalg.solve(a, b)
    return dict(zip(interior, x))


def hitting(chain: ProductChain, anchor=None) -> dict:
    """Hitting probability of the goal for every chain state.

    With an anchor, states unreachable from it are reported as 0; without one
    every value is the true hitting probability.
    """
    cls = classify(chain, anchor)
    rows = _pruned_rows(chain, cls)
    try:
        solved = solve_pruned(rows, cls.interior)
    except linalg.SingularMatrixError as e:  # pragma: no cover - excluded by construction
        raise AssertionError(f"pruned chain is not weakly chained: {e}") from e
    h = {}
    for s in chain.states:
        if s in cls.win:
            h[s] = ONE
        elif s in cls.lose:
            h[s] = ZERO
        else:
            h[s] = solved[s]
    return h


def payoff_under_advice(g: Game, d: ControllerAdvice, player: str, start: str) -> Fraction:
    """Expected payoff of ``player`` from ``start`` when everyone follows ``d``."""
    if start not in g.states:
        raise KeyError(f"unknown state {start!r}")
    if start in g.goals[player]:
        return ONE
    anchor = Plain(start)
    return hitting(build_chain(g, d, player), anchor)[anchor]


def relevant_states(g: Game, player: str) -> list[str]:
    """States ending some history of the full game that never visits the
    player's goal, in game order."""
    goal = g.goals[player]
    if g.initial in goal:
        return []
    seen = {g.initial}
    todo = deque([g.initial])
    while todo:
        q = todo.popleft()
        for q2 in g.successors(q):
            if q2 not in goal and q2 not in seen:
                seen.add(q2)
                todo.append(q2)
    return [q for q in g.states if q in seen]
