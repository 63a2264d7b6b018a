"""Brute-force and Monte-Carlo cross-checks.

Nothing here reuses the product-chain or chain-analysis code paths: values are
obtained by collapsing a memoryless policy into a chain over game states,
and solved with plain Gauss-Jordan elimination over fractions.
"""

from __future__ import annotations

import itertools
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .bayesnet import BayesNet, Cpt, Prior
from .model import ControllerAdvice, Game, make_advice, make_game
from .product import DeviationMdp, Plain

DEFAULT_POLICY_CAP = 1 << 16
CAP_ENV = "CEVERIFY_POLICY_CAP"


class CapExceeded(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"{count} policies to enumerate, cap is {cap} (set {CAP_ENV} to raise it)")
        self.count = count
        self.cap = cap


def policy_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    return int(raw) if raw else DEFAULT_POLICY_CAP


# ---------------------------------------------------------------------------
# a deliberately naive exact solver


def gauss_jordan(a: list, b: list) -> list:
    n = len(a)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def reach_values(states, step: dict, goal) -> dict:
    """Probability of ever reaching ``goal`` in the chain ``step[q] = {q2: p}``."""
    can = set(goal)
    changed = True
    while changed:
        changed = False
        for q in states:
            if q not in can and any(p and q2 in can for q2, p in step[q].items()):
                can.add(q)
                changed = True
    unknown = [q for q in states if q in can and q not in goal]
    pos = {q: k for k, q in enumerate(unknown)}
    a = [[Fraction(0)] * len(unknown) for _ in unknown]
    b = [Fraction(0)] * len(unknown)
    for q in unknown:
        k = pos[q]
        a[k][k] += 1
        for q2, p in step[q].items():
            if q2 in goal:
                b[k] += p
            elif q2 in pos:
                a[k][pos[q2]] -= p
    x = gauss_jordan(a, b) if unknown else []
    out = {q: Fraction(0) for q in states}
    out.update({q: Fraction(1) for q in goal})
    out.update({q: x[pos[q]] for q in unknown})
    return out


# ---------------------------------------------------------------------------
# per-player deviation tables straight from the game and advice


@dataclass
class _Table:
    states: tuple
    goal: frozenset
    recommend: dict  # q -> {a: P(a recommended at q)}
    choices: dict  # (q, a) -> {b: {q2: p}}

    def collapse(self, policy: dict) -> dict:
        step = {}
        for q in self.states:
            row: dict = {}
            for a, pa in self.recommend[q].items():
                b = policy.get((q, a), a)
                for q2, p in self.choices[(q, a)][b].items():
                    row[q2] = row.get(q2, 0) + pa * p
            step[q] = row
        return step

    def values(self, policy: dict) -> dict:
        return reach_values(self.states, self.collapse(policy), self.goal)

    def decision_points(self) -> list:
        """Advised pairs where the player has a real choice and it matters."""
        out = []
        for (q, a), by_b in self.choices.items():
            if q in self.goal:
                continue
            distinct = {tuple(sorted(dist.items())) for dist in by_b.values()}
            if len(distinct) > 1:
                out.append((q, a))
        return out


def _deviation_table(g: Game, d: ControllerAdvice, player: str) -> _Table:
    k = g.players.index(player)
    recommend, choices = {}, {}
    for q in g.states:
        by_a: dict = {}
        for joint, p in d.table[q]:
            by_a.setdefault(joint[k], []).append((joint, p))
        recommend[q] = {a: sum(p for _, p in rows) for a, rows in by_a.items()}
        for a, rows in by_a.items():
            total = recommend[q][a]
            per_b = {}
            for b in g.availability[(q, player)]:
                dist: dict = {}
                for joint, p in rows:
                    dev = joint[:k] + (b,) + joint[k + 1:]
                    for q2, t in g.transitions[(q, dev)].items():
                        dist[q2] = dist.get(q2, 0) + p * t / total
                per_b[b] = {q2: t for q2, t in dist.items() if t}
            choices[(q, a)] = per_b
    return _Table(tuple(g.states), frozenset(g.goals[player]), recommend, choices)


def _all_policies(options: dict, cap):
    """Every assignment of one option to each key of ``options``."""
    points = list(options)
    count = math.prod(len(o) for o in options.values())
    if count > cap:
        raise CapExceeded(count, cap)
    for pick in itertools.product(*options.values()):
        yield dict(zip(points, pick))


def _best_values(table: _Table, cap) -> tuple[dict, dict]:
    """Pointwise maximum over every deterministic memoryless policy."""
    follow = table.values({})
    best = dict(follow)
    options = {s: sorted(table.choices[s]) for s in table.decision_points()}
    for policy in _all_policies(options, cap):
        for q, v in table.values(policy).items():
            if v > best[q]:
                best[q] = v
    return follow, best


def _relevant(g: Game, player: str) -> list:
    goal = g.goals[player]
    if g.initial in goal:
        return []
    seen, todo = {g.initial}, [g.initial]
    while todo:
        q = todo.pop()
        for joint in itertools.product(*(g.availability[(q, p)] for p in g.players)):
            for q2, p in g.transitions[(q, joint)].items():
                if p and q2 not in goal and q2 not in seen:
                    seen.add(q2)
                    todo.append(q2)
    return [q for q in g.states if q in seen]


@dataclass(frozen=True)
class BruteVerdict:
    holds: bool
    player: Optional[str] = None
    state: Optional[str] = None
    value_following: Optional[Fraction] = None
    value_best: Optional[Fraction] = None


def _brute(g: Game, d: ControllerAdvice, anchors_of, cap) -> BruteVerdict:
    cap = policy_cap() if cap is None else cap
    for player in g.players:
        anchors = anchors_of(player)
        if not anchors:
            continue
        follow, best = _best_values(_deviation_table(g, d, player), cap)
        for q in anchors:
            if best[q] > follow[q]:
                return BruteVerdict(False, player, q, follow[q], best[q])
    return BruteVerdict(True)


def brute_force_ce(g: Game, d: ControllerAdvice, cap: Optional[int] = None) -> BruteVerdict:
    return _brute(g, d, lambda p: [] if g.initial in g.goals[p] else [g.initial], cap)


def brute_force_spce(g: Game, d: ControllerAdvice, cap: Optional[int] = None) -> BruteVerdict:
    return _brute(g, d, lambda p: _relevant(g, p), cap)


def brute_force_values(g: Game, d: ControllerAdvice, player: str, cap: Optional[int] = None):
    """(follow-advice values, optimal values) over game states."""
    return _best_values(_deviation_table(g, d, player), policy_cap() if cap is None else cap)


def enumerate_policies(mdp: DeviationMdp, anchor=None, cap: Optional[int] = None):
    """Exact optimum at ``anchor`` over every deterministic memoryless policy
    of a deviation MDP. Returns (value, policy)."""
    cap = policy_cap() if cap is None else cap
    anchor = mdp.initial if anchor is None else anchor
    states = tuple(mdp.states)
    seen, todo = {anchor}, [anchor]
    while todo:
        s = todo.pop()
        nexts = mdp.plain_edges[s] if isinstance(s, Plain) else {t for dist in mdp.kernel[s].values() for t in dist}
        for t in nexts:
            if t not in seen:
                seen.add(t)
                todo.append(t)
    options = {
        s: list(mdp.kernel[s]) for s in mdp.kernel
        if s in seen and s not in mdp.goal and len(mdp.kernel[s]) > 1
    }
    best_value, best_policy = None, None
    for pick in _all_policies(options, cap):
        policy = {s: s.action for s in mdp.kernel}
        policy.update(pick)
        step = {}
        for s in states:
            if isinstance(s, Plain):
                step[s] = dict(mdp.plain_edges[s])
            else:
                step[s] = dict(mdp.kernel[s][policy[s]])
        v = reach_values(states, step, mdp.goal)[anchor]
        if best_value is None or v > best_value:
            best_value, best_policy = v, policy
    return best_value, best_policy


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    hits: int
    estimate: float
    stderr: float
    seed: int
    horizon: int

    def __post_init__(self):
        if not 0 <= self.hits <= self.trials:
            raise ValueError("hits out of range")


CHUNK = 10_000


def _compliant_step(g: Game, d: ControllerAdvice) -> dict:
    step = {}
    for q in g.states:
        row: dict = {}
        for joint, p in d.table[q]:
            for q2, t in g.transitions[(q, joint)].items():
                row[q2] = row.get(q2, 0) + p * t
        step[q] = row
    return step


def _cdf(probs) -> np.ndarray:
    c = np.cumsum([float(p) for p in probs])
    c[-1] = 1.0
    return c


def simulate(
    g: Game, d: ControllerAdvice, player: str, start: Optional[str] = None,
    trials: int = 100_000, horizon: int = 1000, seed: int = 0,
) -> SimulationReport:
    """Sample plays under the advice: draw a joint action from the advice, then
    a successor from the transition function. Trials run in chunks of
    ``CHUNK``; chunk ``c`` draws from PCG64 seeded with ``[seed, c]``, so the
    result depends only on the seed."""
    if trials < 1 or horizon < 1:
        raise ValueError("trials and horizon must be positive")
    start = g.initial if start is None else start
    index = {q: k for k, q in enumerate(g.states)}
    goal = np.zeros(len(g.states), dtype=bool)
    for q in g.goals[player]:
        goal[index[q]] = True
    # states that can never reach the goal end a trial early; the outcome is fixed
    step = _compliant_step(g, d)
    dead_set = set(g.states) - {q for q, v in reach_values(g.states, step, g.goals[player]).items() if v}
    dead = np.array([q in dead_set for q in g.states])

    joints = {}
    for q in g.states:
        rows = d.table[q]
        succ = []
        for joint, _ in rows:
            dist = g.transitions[(q, joint)]
            targets = np.array([index[q2] for q2 in dist], dtype=np.int64)
            succ.append((targets, _cdf(dist.values())))
        joints[index[q]] = (_cdf([p for _, p in rows]), succ)

    hits = 0
    for chunk, lo in enumerate(range(0, trials, CHUNK)):
        n = min(CHUNK, trials - lo)
        rng = np.random.default_rng([seed, chunk])
        cur = np.full(n, index[start], dtype=np.int64)
        hit = goal[cur].copy()
        active = ~hit & ~dead[cur]
        for _ in range(horizon):
            if not active.any():
                break
            u_joint = rng.random(n)
            u_next = rng.random(n)
            nxt = cur.copy()
            for s in np.unique(cur[active]):
                in_s = active & (cur == s)
                joint_cdf, succ = joints[int(s)]
                pick = np.searchsorted(joint_cdf, u_joint[in_s], side="right")
                where = np.flatnonzero(in_s)
                for j, (targets, cdf) in enumerate(succ):
                    sel = where[pick == j]
                    if sel.size:
                        nxt[sel] = targets[np.searchsorted(cdf, u_next[sel], side="right")]
            cur = nxt
            hit |= active & goal[cur]
            active &= ~goal[cur] & ~dead[cur]
        hits += int(hit.sum())
    est = hits / trials
    return SimulationReport(trials, hits, est, math.sqrt(est * (1 - est) / trials), seed, horizon)


def truncation_bound(g: Game, d: ControllerAdvice, player: str, start: Optional[str], horizon: int) -> float:
    """Probability that a compliant play from ``start`` is, after ``horizon``
    steps, neither in the goal nor in a state that cannot reach it. Bounds
    the gap between the exact hitting value and the horizon-limited one."""
    start = g.initial if start is None else start
    step = _compliant_step(g, d)
    values = reach_values(g.states, step, g.goals[player])
    live = [q for q in g.states if values[q] and q not in g.goals[player]]
    if start not in live:
        return 0.0
    pos = {q: k for k, q in enumerate(live)}
    m = np.zeros((len(live), len(live)))
    for q in live:
        for q2, p in step[q].items():
            if q2 in pos:
                m[pos[q], pos[q2]] += float(p)
    v = np.zeros(len(live))
    v[pos[start]] = 1.0
    v = v @ np.linalg.matrix_power(m, horizon)
    return float(v.sum())


# ---------------------------------------------------------------------------
# random instances


def random_distribution(rng: random.Random, support, max_den: int = 8) -> dict:
    support = list(support)
    den = rng.randint(1, max_den)
    k = rng.randint(1, min(len(support), den))
    chosen = rng.sample(support, k)
    cuts = sorted(rng.sample(range(1, den), k - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return {x: Fraction(n, den) for x, n in zip(chosen, parts)}


def random_instance(
    rng: random.Random, max_states: int = 4, n_players: int = 2,
    actions: tuple = ("a", "b"), max_den: int = 8,
) -> tuple[Game, ControllerAdvice]:
    n = rng.randint(1, max_states)
    states = [f"s{k}" for k in range(n)]
    players = [f"p{k + 1}" for k in range(n_players)]
    # a real choice for most players, so deviations matter
    availability = {
        (q, p): actions if rng.random() < 0.75 else (rng.choice(actions),)
        for q in states for p in players
    }
    # absorbing states keep payoffs away from the trivial all-ones vector
    sinks = {q for q in states[1:] if rng.random() < 0.4}
    transitions = {}
    for q in states:
        for joint in itertools.product(*(availability[(q, p)] for p in players)):
            transitions[(q, joint)] = {q: 1} if q in sinks else random_distribution(rng, states, max_den)
    goals = {
        p: {q for q in states if rng.random() < (0.1 if q == states[0] else 0.4)} for p in players
    }
    g = make_game(states, states[0], players, actions, availability, transitions, goals)
    advice = {q: random_distribution(rng, list(g.joint_actions(q)), max_den) for q in states}
    return g, make_advice(g, advice)


def random_net(rng: random.Random, max_binary: float = 16, max_den: int = 6) -> BayesNet:
    """Random network whose total state space is at most ``2**max_binary``."""
    vertices, domains, parents, theta = [], {}, {}, {}
    budget = max_binary
    while True:
        size = rng.choice((2, 2, 2, 3))
        if math.log2(size) > budget:
            break
        budget -= math.log2(size)
        v = f"v{len(vertices)}"
        dom = tuple(f"x{k}" for k in range(size))
        ps = tuple(rng.sample(vertices, min(len(vertices), rng.randint(0, 3))))
        if ps:
            table = {
                a: random_distribution(rng, dom, max_den)
                for a in itertools.product(*(domains[p] for p in ps))
            }
            theta[v] = Cpt(table)
        else:
            theta[v] = Prior(random_distribution(rng, dom, max_den))
        vertices.append(v)
        domains[v] = dom
        parents[v] = ps
        if rng.random() < 0.1:
            break
    return BayesNet(tuple(vertices), domains, parents, theta)


def enumerate_joint(net: BayesNet):
    """Every assignment with positive probability, as (dict, probability)."""
    order = net.topological()

    def probability(v, assignment):
        t = net.theta[v]
        if isinstance(t, Prior):
            return t.dist
        return t.table[tuple(assignment[p] for p in net.parents[v])]

    def walk(k, assignment, p):
        if k == len(order):
            yield dict(assignment), p
            return
        v = order[k]
        for x, px in probability(v, assignment).items():
            if px:
                assignment[v] = x
                yield from walk(k + 1, assignment, p * px)
        assignment.pop(v, None)

    yield from walk(0, {}, Fraction(1))


def enumerate_marginal(net: BayesNet, keep, evidence=None) -> dict:
    evidence = evidence or {}
    out: dict = {}
    total = Fraction(0)
    for a, p in enumerate_joint(net):
        if all(a[v] == x for v, x in evidence.items()):
            key = tuple(a[v] for v in keep)
            out[key] = out.get(key, 0) + p
            total += p
    if total == 0:
        raise ZeroDivisionError("evidence has probability zero")
    return {k: p / total for k, p in out.items()}
