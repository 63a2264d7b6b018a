"""Circuit Value Problem and its reduction to CE verification.

The reduction builds a one-player game. At ``start`` the player either takes
the fixed-payoff lottery ``fp`` (what the advice recommends) or enters the
circuit. Or-gates are the player's choice between inputs, and-gates are fair
coin flips between inputs, constant gates move to the ``true``/``false`` sinks.
With ``n`` gates, ``fp`` hits ``true`` with probability ``1 - 2^-n + 2^-(n+1)``,
which beats any false circuit (value at most ``1 - 2^-n``) and loses to a true
one (value 1). So the advice is a CE exactly when the circuit is false.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .model import ControllerAdvice, FormatError, Game, ModelError, make_advice, make_game

KINDS = ("true", "false", "and", "or")
PLAYER = "p"
GO, TO_FP, ENTER, LEFT, RIGHT = "go", "fp", "enter", "left", "right"


class CircuitError(ModelError):
    pass


@dataclass(frozen=True)
class Circuit:
    gates: tuple  # (kind, left, right); indices are 1-based, unused for constants
    output: int

    def __post_init__(self):
        n = len(self.gates)
        if n == 0:
            raise CircuitError("circuit has no gates")
        if not 1 <= self.output <= n:
            raise CircuitError(f"output gate {self.output} out of range 1..{n}")
        for k, (kind, left, right) in enumerate(self.gates, 1):
            if kind not in KINDS:
                raise CircuitError(f"gate {k}: unknown kind {kind!r}")
            if kind in ("and", "or"):
                for ref in (left, right):
                    if not isinstance(ref, int) or not 1 <= ref <= n:
                        raise CircuitError(f"gate {k}: input {ref!r} out of range 1..{n}")

    def inputs(self, k: int) -> tuple[int, int]:
        _, left, right = self.gates[k - 1]
        return left, right


def _topological(c: Circuit) -> list[int]:
    """Gates reachable from the output, children before parents."""
    order, state = [], {}
    stack = [(c.output, False)]
    while stack:
        k, done = stack.pop()
        if done:
            state[k] = 2
            order.append(k)
            continue
        if state.get(k) == 2:
            continue
        if state.get(k) == 1:
            raise CircuitError(f"circuit is cyclic through gate {k}")
        state[k] = 1
        stack.append((k, True))
        kind = c.gates[k - 1][0]
        if kind in ("and", "or"):
            for ref in c.inputs(k):
                if state.get(ref) == 1:
                    raise CircuitError(f"circuit is cyclic through gate {ref}")
                if state.get(ref) != 2:
                    stack.append((ref, False))
    return order


def check_acyclic(c: Circuit) -> None:
    """Acyclicity of the whole reference graph, not only the output cone."""
    for k in range(1, len(c.gates) + 1):
        _topological(Circuit(c.gates, k))


def eval_circuit(c: Circuit) -> bool:
    value: dict[int, bool] = {}
    for k in _topological(c):
        kind = c.gates[k - 1][0]
        if kind == "true":
            value[k] = True
        elif kind == "false":
            value[k] = False
        else:
            left, right = c.inputs(k)
            if kind == "and":
                value[k] = value[left] and value[right]
            else:
                value[k] = value[left] or value[right]
    return value[c.output]


def fixed_payoff(n_gates: int) -> Fraction:
    return 1 - Fraction(1, 2**n_gates) + Fraction(1, 2 ** (n_gates + 1))


def gate_state(k: int) -> str:
    return f"g{k}"


def reduce(c: Circuit) -> tuple[Game, ControllerAdvice]:
    check_acyclic(c)
    n = len(c.gates)
    gates = [gate_state(k) for k in range(1, n + 1)]
    states = ["start", "fp", "true", "false"] + gates
    availability = {(q, PLAYER): (GO,) for q in states}
    availability[("start", PLAYER)] = (TO_FP, ENTER)
    p_fp = fixed_payoff(n)
    transitions = {
        ("start", (TO_FP,)): {"fp": 1},
        ("start", (ENTER,)): {gate_state(c.output): 1},
        ("fp", (GO,)): {"true": p_fp, "false": 1 - p_fp},
        ("true", (GO,)): {"true": 1},
        ("false", (GO,)): {"false": 1},
    }
    advice = {q: {(GO,): 1} for q in states}
    advice["start"] = {(TO_FP,): 1}
    for k, (kind, left, right) in enumerate(c.gates, 1):
        q = gate_state(k)
        if kind in ("true", "false"):
            transitions[(q, (GO,))] = {kind: 1}
        elif kind == "and":
            if left == right:
                transitions[(q, (GO,))] = {gate_state(left): 1}
            else:
                half = Fraction(1, 2)
                transitions[(q, (GO,))] = {gate_state(left): half, gate_state(right): half}
        else:
            availability[(q, PLAYER)] = (LEFT, RIGHT)
            transitions[(q, (LEFT,))] = {gate_state(left): 1}
            transitions[(q, (RIGHT,))] = {gate_state(right): 1}
            advice[q] = {(LEFT,): 1}
    g = make_game(
        states, "start", (PLAYER,), (TO_FP, ENTER, LEFT, RIGHT, GO),
        availability, transitions, {PLAYER: {"true"}},
    )
    return g, make_advice(g, advice)


def all_circuits(n: int):
    """Every circuit with ``n`` gates whose inputs refer to earlier gates,
    with every choice of output gate."""
    def extend(prefix):
        k = len(prefix) + 1
        if k > n:
            yield tuple(prefix)
            return
        for kind in ("true", "false"):
            yield from extend(prefix + [(kind, 0, 0)])
        for kind in ("and", "or"):
            for left in range(1, k):
                for right in range(1, k):
                    yield from extend(prefix + [(kind, left, right)])

    for gates in extend([]):
        for out in range(1, n + 1):
            yield Circuit(gates, out)


def random_circuit(rng: random.Random, n: int) -> Circuit:
    gates = []
    for k in range(1, n + 1):
        if k == 1 or rng.random() < 0.3:
            gates.append((rng.choice(("true", "false")), 0, 0))
        else:
            gates.append((rng.choice(("and", "or")), rng.randint(1, k - 1), rng.randint(1, k - 1)))
    return Circuit(tuple(gates), n)


def circuit_from_dict(doc: Mapping) -> Circuit:
    if "gates" not in doc or "output" not in doc:
        raise FormatError("circuit: needs 'gates' and 'output'")
    gates = []
    for k, row in enumerate(doc["gates"], 1):
        if not isinstance(row, list) or not row:
            raise FormatError(f"circuit gate {k}: expected [kind, left, right]")
        kind = row[0]
        if kind in ("true", "false"):
            gates.append((kind, 0, 0))
        elif len(row) == 3:
            gates.append((kind, row[1], row[2]))
        else:
            raise FormatError(f"circuit gate {k}: {kind!r} needs two inputs")
    return Circuit(tuple(gates), doc["output"])


def circuit_to_dict(c: Circuit) -> dict:
    rows = [[kind] if kind in ("true", "false") else [kind, left, right] for kind, left, right in c.gates]
    return {"gates": rows, "output": c.output}


def parse_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"circuit: {e.msg} at line {e.lineno} column {e.colno}") from None
    return circuit_from_dict(doc)
