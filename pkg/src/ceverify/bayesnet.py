"""Bayesian networks for advice and transition functions.

A network is a DAG whose vertices carry a prior, a conditional table, or are
marked as inputs. Advice at a state is a network with one action vertex per
player; a transition function at a state has one input vertex per player and a
boolean output vertex per successor state. Inference is exact variable
elimination over sparse rational factors.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

from .model import (
    ZERO,
    ControllerAdvice,
    FormatError,
    Game,
    ModelError,
    format_rational,
    make_advice,
    make_game,
    parse_rational,
)

TRUE, FALSE = "1", "0"
BOOL = (FALSE, TRUE)
TRANS_PREFIX = "t:"


class NetError(ModelError):
    pass


class InferenceError(NetError):
    pass


class BudgetExceeded(NetError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"unfolding needs about {estimate} table entries, budget is {budget}")
        self.estimate = estimate
        self.budget = budget


@dataclass(frozen=True)
class Prior:
    dist: dict  # value -> Fraction


@dataclass(frozen=True)
class Cpt:
    table: dict  # parent assignment tuple -> {value: Fraction}


@dataclass(frozen=True)
class Input:
    pass


Theta = Union[Prior, Cpt, Input]


@dataclass(frozen=True)
class BayesNet:
    vertices: tuple
    domains: dict
    parents: dict
    theta: dict

    def __post_init__(self):
        _validate_net(self)

    def has_inputs(self) -> bool:
        return any(isinstance(t, Input) for t in self.theta.values())

    def topological(self) -> list:
        return _toposort(self)


@dataclass(frozen=True)
class AdviceNet:
    net: BayesNet
    actions: dict  # player -> vertex


@dataclass(frozen=True)
class TransitionNet:
    net: BayesNet
    inputs: dict  # player -> input vertex
    outputs: dict  # state -> boolean output vertex


@dataclass(frozen=True)
class DeviationNet:
    net: BayesNet
    evidence: dict
    outputs: dict  # state -> vertex of ``net``


@dataclass(frozen=True)
class Skeleton:
    states: tuple
    initial: str
    players: tuple
    actions: tuple
    availability: dict  # (state, player) -> actions
    goals: dict


def _toposort(net) -> list:
    indeg = {v: len(net.parents.get(v, ())) for v in net.vertices}
    children = defaultdict(list)
    for v in net.vertices:
        for p in net.parents.get(v, ()):
            children[p].append(v)
    ready = [v for v in net.vertices if indeg[v] == 0]
    out = []
    while ready:
        v = ready.pop(0)
        out.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if len(out) != len(net.vertices):
        stuck = [v for v in net.vertices if v not in out]
        raise NetError(f"network has a cycle through {stuck}")
    return out


def _check_dist(v, dist, domain, where):
    for x, p in dist.items():
        if x not in domain:
            raise NetError(f"vertex {v!r}{where}: value {x!r} not in domain {list(domain)}")
        if p < 0:
            raise NetError(f"vertex {v!r}{where}: negative probability")
    total = sum(dist.values(), ZERO)
    if total != 1:
        raise NetError(f"vertex {v!r}{where}: distribution sums to {format_rational(total)}")


def _validate_net(net: BayesNet) -> None:
    if len(set(net.vertices)) != len(net.vertices):
        raise NetError("duplicate vertex names")
    names = set(net.vertices)
    for v in net.vertices:
        domain = net.domains.get(v)
        if not domain:
            raise NetError(f"vertex {v!r} has an empty domain")
        parents = net.parents.get(v, ())
        for p in parents:
            if p not in names:
                raise NetError(f"vertex {v!r} has unknown parent {p!r}")
        theta = net.theta.get(v)
        if isinstance(theta, (Prior, Input)):
            if parents:
                raise NetError(f"vertex {v!r} has parents but no conditional table")
            if isinstance(theta, Prior):
                _check_dist(v, theta.dist, domain, "")
        elif isinstance(theta, Cpt):
            if not parents:
                raise NetError(f"vertex {v!r} has a conditional table but no parents")
            for assignment in itertools.product(*(net.domains[p] for p in parents)):
                if assignment not in theta.table:
                    raise NetError(
                        f"vertex {v!r}: conditional table misses parent assignment {list(assignment)}"
                    )
                _check_dist(v, theta.table[assignment], domain, f" given {list(assignment)}")
        else:
            raise NetError(f"vertex {v!r} has no distribution")
    _toposort(net)


# ---------------------------------------------------------------------------
# variable elimination


def _vertex_factor(net: BayesNet, v):
    theta = net.theta[v]
    if isinstance(theta, Prior):
        return ((v,), {(x,): p for x, p in theta.dist.items() if p})
    parents = tuple(net.parents[v])
    table = {}
    for assignment, dist in theta.table.items():
        for x, p in dist.items():
            if p:
                table[assignment + (x,)] = p
    return (parents + (v,), table)


def _restrict(factor, evidence):
    scope, table = factor
    fixed = [(k, evidence[v]) for k, v in enumerate(scope) if v in evidence]
    if not fixed:
        return factor
    keep = [k for k, v in enumerate(scope) if v not in evidence]
    out = {}
    for a, p in table.items():
        if all(a[k] == x for k, x in fixed):
            out[tuple(a[k] for k in keep)] = p
    return (tuple(scope[k] for k in keep), out)


def _product(f, g):
    fv, ft = f
    gv, gt = g
    shared = [v for v in gv if v in fv]
    extra = [v for v in gv if v not in fv]
    fi = [fv.index(v) for v in shared]
    gi = [gv.index(v) for v in shared]
    ge = [gv.index(v) for v in extra]
    index = defaultdict(list)
    for ga, gp in gt.items():
        index[tuple(ga[i] for i in gi)].append((tuple(ga[i] for i in ge), gp))
    out = {}
    for fa, fp in ft.items():
        for ext, gp in index.get(tuple(fa[i] for i in fi), ()):
            out[fa + ext] = fp * gp
    return (fv + tuple(extra), out)


def _sum_out(f, var):
    scope, table = f
    k = scope.index(var)
    out: dict = {}
    for a, p in table.items():
        key = a[:k] + a[k + 1 :]
        out[key] = out.get(key, ZERO) + p
    return (scope[:k] + scope[k + 1 :], {a: p for a, p in out.items() if p})


def _min_degree_order(factors, eliminate, rank):
    scopes = [set(s) for s, _ in factors]
    remaining = set(eliminate)
    order = []
    while remaining:
        def degree(v):
            nbrs = set()
            for s in scopes:
                if v in s:
                    nbrs |= s
            return len(nbrs - {v})

        v = min(remaining, key=lambda u: (degree(u), rank[u]))
        merged = set()
        rest = []
        for s in scopes:
            if v in s:
                merged |= s
            else:
                rest.append(s)
        rest.append(merged - {v})
        scopes = rest
        remaining.remove(v)
        order.append(v)
    return order


def marginal(net: BayesNet, keep, evidence: Optional[Mapping] = None) -> dict:
    """Joint distribution of ``keep`` given ``evidence``: {values tuple: prob}."""
    evidence = dict(evidence or {})
    keep = tuple(keep)
    if net.has_inputs():
        raise InferenceError("cannot run inference on a network with input vertices")
    for v, x in list(evidence.items()) + [(v, None) for v in keep]:
        if v not in net.domains:
            raise InferenceError(f"unknown vertex {v!r}")
        if x is not None and x not in net.domains[v]:
            raise InferenceError(f"evidence {v}={x!r} is outside the domain")
    rank = {v: k for k, v in enumerate(net.vertices)}
    reducible = {v: x for v, x in evidence.items() if v not in keep}
    factors = [_restrict(_vertex_factor(net, v), reducible) for v in net.vertices]
    for v in keep:
        if v in evidence:
            factors.append(((v,), {(evidence[v],): Fraction(1)}))
    eliminate = [v for v in net.vertices if v not in keep and v not in reducible]
    for var in _min_degree_order(factors, eliminate, rank):
        touching = [f for f in factors if var in f[0]]
        factors = [f for f in factors if var not in f[0]]
        prod = touching[0]
        for f in touching[1:]:
            prod = _product(prod, f)
        factors.append(_sum_out(prod, var))
    result = ((), {(): Fraction(1)})
    for f in factors:
        result = _product(result, f)
    scope, table = result
    total = sum(table.values(), ZERO)
    if total == 0:
        raise InferenceError(f"evidence {evidence} has probability zero")
    perm = [scope.index(v) for v in keep]
    return {tuple(a[k] for k in perm): p / total for a, p in table.items()}


def infer(net: BayesNet, query, value, evidence: Optional[Mapping] = None) -> Fraction:
    """P(query = value | evidence)."""
    if value not in net.domains.get(query, ()):
        raise InferenceError(f"value {value!r} is not in the domain of {query!r}")
    return marginal(net, [query], evidence).get((value,), ZERO)


# ---------------------------------------------------------------------------
# composition


def _rename(net: BayesNet, prefix: str) -> dict:
    return {
        "vertices": [prefix + v for v in net.vertices],
        "domains": {prefix + v: net.domains[v] for v in net.vertices},
        "parents": {prefix + v: tuple(prefix + p for p in net.parents.get(v, ())) for v in net.vertices},
        "theta": {prefix + v: net.theta[v] for v in net.vertices},
    }


def _wire(advice: AdviceNet, trans: TransitionNet, override: Optional[tuple] = None) -> BayesNet:
    parts = _rename(trans.net, TRANS_PREFIX)
    vertices = list(advice.net.vertices) + parts["vertices"]
    domains = {**advice.net.domains, **parts["domains"]}
    parents = {**advice.net.parents, **parts["parents"]}
    theta = {**advice.net.theta, **parts["theta"]}
    if set(advice.actions) != set(trans.inputs):
        raise NetError("advice and transition networks name different players")
    for player, inp in trans.inputs.items():
        src = advice.actions[player]
        v = TRANS_PREFIX + inp
        if not isinstance(trans.net.theta[inp], Input):
            raise NetError(f"transition vertex {inp!r} is not an input")
        if override is not None and override[0] == player:
            b = override[1]
            if b not in domains[v]:
                raise NetError(f"action {b!r} is outside the input domain of {inp!r}")
            theta[v] = Prior({b: Fraction(1)})
            continue
        missing = set(advice.net.domains[src]) - set(domains[v])
        if missing:
            raise NetError(
                f"domain mismatch for player {player!r}: {sorted(missing)} not accepted by {inp!r}"
            )
        parents[v] = (src,)
        theta[v] = Cpt({(x,): {x: Fraction(1)} for x in advice.net.domains[src]})
    return BayesNet(tuple(vertices), domains, parents, theta)


def compose(advice: AdviceNet, trans: TransitionNet) -> BayesNet:
    """One input-free network: each transition input copies the advice vertex
    of the same player. Transition vertices are renamed with ``t:``."""
    return _wire(advice, trans)


def composed_outputs(trans: TransitionNet) -> dict:
    return {q: TRANS_PREFIX + v for q, v in trans.outputs.items()}


def deviation_net(advice: AdviceNet, trans: TransitionNet, player, a, b) -> DeviationNet:
    """Network for the successor distribution when ``player`` is recommended
    ``a`` but plays ``b``: conditioning on the recommendation is carried as
    evidence, the player's transition input is pinned to ``b``."""
    src = advice.actions[player]
    if infer(advice.net, src, a) == 0:
        raise InferenceError(f"player {player!r} is never recommended {a!r}")
    net = _wire(advice, trans, override=(player, b))
    return DeviationNet(net, {src: a}, composed_outputs(trans))


def instantiate(net: BayesNet, values: Mapping) -> BayesNet:
    """Replace input vertices by point priors."""
    theta = dict(net.theta)
    for v, x in values.items():
        if not isinstance(net.theta.get(v), Input):
            raise NetError(f"{v!r} is not an input vertex")
        theta[v] = Prior({x: Fraction(1)})
    return BayesNet(net.vertices, net.domains, net.parents, theta)


def unfold(
    skeleton: Skeleton,
    advice_nets: Mapping,
    trans_nets: Mapping,
    budget: int = 1 << 16,
) -> tuple[Game, ControllerAdvice]:
    """Explicit tables for a model given by per-state networks."""
    n_joint = 0
    for q in skeleton.states:
        k = 1
        for p in skeleton.players:
            k *= len(skeleton.availability[(q, p)])
        n_joint += k
    estimate = n_joint * len(skeleton.states)
    if estimate > budget:
        raise BudgetExceeded(estimate, budget)

    transitions = {}
    table = {}
    for q in skeleton.states:
        if q not in advice_nets or q not in trans_nets:
            raise NetError(f"no networks given for state {q!r}")
        adv = advice_nets[q]
        joint = marginal(adv.net, [adv.actions[p] for p in skeleton.players])
        table[q] = {j: p for j, p in joint.items() if p}
        trans = trans_nets[q]
        avail = [skeleton.availability[(q, p)] for p in skeleton.players]
        for j in itertools.product(*avail):
            net = instantiate(trans.net, {trans.inputs[p]: x for p, x in zip(skeleton.players, j)})
            row = {}
            for q2, v in trans.outputs.items():
                pr = infer(net, v, TRUE)
                if pr:
                    row[q2] = pr
            total = sum(row.values(), ZERO)
            if total != 1:
                raise NetError(
                    f"transition network at state {q!r} is not stochastic for joint {list(j)}: "
                    f"outputs sum to {format_rational(total)}"
                )
            transitions[(q, tuple(j))] = row
    g = make_game(
        skeleton.states, skeleton.initial, skeleton.players, skeleton.actions,
        skeleton.availability, transitions, skeleton.goals,
    )
    return g, make_advice(g, table)


# ---------------------------------------------------------------------------
# documents


def _dist(doc, where):
    if not isinstance(doc, Mapping):
        raise FormatError(f"{where}: distribution must be an object")
    return {str(x): parse_rational(p) for x, p in doc.items()}


def _cpt_rows(rows, where):
    table = {}
    for k, row in enumerate(rows):
        given = tuple(str(x) for x in row.get("given", ()))
        if "value" in row:
            table[given] = {str(row["value"]): Fraction(1)}
        elif "dist" in row:
            table[given] = _dist(row["dist"], f"{where} row {k}")
        else:
            raise FormatError(f"{where} row {k}: needs 'value' or 'dist'")
    return table


def net_from_dict(doc: Mapping, shared: Optional[Mapping] = None) -> BayesNet:
    tables = dict(shared or {})
    tables.update(doc.get("tables", {}))
    vertices, domains, parents, theta = [], {}, {}, {}
    if "vertices" not in doc:
        raise FormatError("network: missing field 'vertices'")
    for k, vd in enumerate(doc["vertices"]):
        if "name" not in vd or "domain" not in vd:
            raise FormatError(f"network vertex {k}: needs 'name' and 'domain'")
        v = str(vd["name"])
        vertices.append(v)
        domains[v] = tuple(str(x) for x in vd["domain"])
        parents[v] = tuple(str(p) for p in vd.get("parents", ()))
        if vd.get("input"):
            theta[v] = Input()
        elif "prior" in vd:
            theta[v] = Prior(_dist(vd["prior"], f"vertex {v!r}"))
        elif "cpt" in vd:
            rows = vd["cpt"]
            if isinstance(rows, str):
                if rows not in tables:
                    raise FormatError(f"vertex {v!r}: unknown shared table {rows!r}")
                rows = tables[rows]
            theta[v] = Cpt(_cpt_rows(rows, f"vertex {v!r}"))
        else:
            raise FormatError(f"vertex {v!r}: needs 'prior', 'cpt' or 'input'")
    return BayesNet(tuple(vertices), domains, parents, theta)


def net_to_dict(net: BayesNet) -> dict:
    out = []
    for v in net.vertices:
        vd = {"name": v, "domain": list(net.domains[v])}
        if net.parents.get(v):
            vd["parents"] = list(net.parents[v])
        t = net.theta[v]
        if isinstance(t, Input):
            vd["input"] = True
        elif isinstance(t, Prior):
            vd["prior"] = {x: format_rational(p) for x, p in t.dist.items()}
        else:
            vd["cpt"] = [
                {"given": list(a), "dist": {x: format_rational(p) for x, p in dist.items()}}
                for a, dist in t.table.items()
            ]
        out.append(vd)
    return {"vertices": out}


def parse_net(text: str) -> BayesNet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"network: {e.msg} at line {e.lineno} column {e.colno}") from None
    return net_from_dict(doc)


def model_from_dict(doc: Mapping):
    """Skeleton plus per-state advice and transition networks."""
    for key in ("states", "initial", "players", "actions", "goals", "advice", "transitions"):
        if key not in doc:
            raise FormatError(f"network model: missing field {key!r}")
    shared = doc.get("tables", {})
    players = tuple(str(p) for p in doc["players"])
    actions = tuple(str(a) for a in doc["actions"])
    states = tuple(str(q) for q in doc["states"])
    avail_doc = doc.get("availability", {})
    availability = {
        (q, p): tuple(avail_doc.get(q, {}).get(p, actions)) for q in states for p in players
    }
    skeleton = Skeleton(
        states, str(doc["initial"]), players, actions, availability,
        {p: frozenset(doc["goals"].get(p, ())) for p in players},
    )
    advice = {}
    for q, nd in doc["advice"].items():
        advice[q] = AdviceNet(net_from_dict(nd, shared), dict(nd["actions"]))
    trans = {}
    for q, nd in doc["transitions"].items():
        trans[q] = TransitionNet(net_from_dict(nd, shared), dict(nd["inputs"]), dict(nd["outputs"]))
    return skeleton, advice, trans


def model_to_dict(skeleton: Skeleton, advice: Mapping, trans: Mapping) -> dict:
    doc = {
        "states": list(skeleton.states),
        "initial": skeleton.initial,
        "players": list(skeleton.players),
        "actions": list(skeleton.actions),
        "availability": {
            q: {p: list(skeleton.availability[(q, p)]) for p in skeleton.players} for q in skeleton.states
        },
        "goals": {p: [q for q in skeleton.states if q in skeleton.goals[p]] for p in skeleton.players},
        "advice": {},
        "transitions": {},
    }
    for q in skeleton.states:
        doc["advice"][q] = {**net_to_dict(advice[q].net), "actions": dict(advice[q].actions)}
        t = trans[q]
        doc["transitions"][q] = {**net_to_dict(t.net), "inputs": dict(t.inputs), "outputs": dict(t.outputs)}
    return doc


def parse_model(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"network model: {e.msg} at line {e.lineno} column {e.colno}") from None
    return model_from_dict(doc)
