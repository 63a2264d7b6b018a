"""Games, controller advice and exact rationals.

A game is a probabilistic concurrent game graph with one reachability goal per
player. Controller advice maps each state to a finite distribution over joint
actions. Every probability is a :class:`fractions.Fraction`.

Documents are JSON. See ``docs/formats.md`` for the grammar.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping

Rational = Fraction
JointAction = tuple  # one action id per player, in player order

ZERO = Fraction(0)
ONE = Fraction(1)


class ModelError(ValueError):
    """A document parsed but violates a model invariant."""


class FormatError(ValueError):
    """A document is not syntactically well formed."""


# ---------------------------------------------------------------------------
# rationals

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)\s*$")
_BINARY_RE = re.compile(r"^\s*0b([01]*)(?:\.([01]*))?\s*$")


def parse_rational(value: Any) -> Fraction:
    """Parse ``"n/d"``, a terminating decimal, ``"0b0.101"`` or an int."""
    if isinstance(value, bool):
        raise FormatError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if not isinstance(value, str):
        raise FormatError(f"rationals must be strings like '1/3', got {value!r}")
    m = _FRACTION_RE.match(value)
    if m:
        den = int(m.group(2))
        if den == 0:
            raise FormatError(f"zero denominator in {value!r}")
        return Fraction(int(m.group(1)), den)
    m = _BINARY_RE.match(value)
    if m and (m.group(1) or m.group(2)):
        whole, frac = m.group(1) or "0", m.group(2) or ""
        return Fraction(int(whole + frac, 2), 2 ** len(frac))
    if _DECIMAL_RE.match(value):
        return Fraction(value.strip())
    raise FormatError(f"not a rational: {value!r}")


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def bit_length(x: Fraction) -> int:
    return max(abs(x.numerator).bit_length(), x.denominator.bit_length())


# ---------------------------------------------------------------------------
# model types


@dataclass(frozen=True)
class Game:
    states: tuple[str, ...]
    initial: str
    players: tuple[str, ...]
    actions: tuple[str, ...]
    # (state, player) -> allowed actions, in game action order
    availability: dict[tuple[str, str], tuple[str, ...]]
    # (state, joint action) -> {successor: probability}, zero entries omitted
    transitions: dict[tuple[str, tuple[str, ...]], dict[str, Fraction]]
    goals: dict[str, frozenset[str]]

    def __post_init__(self):
        _validate_game(self)

    def available(self, q: str, player: str) -> tuple[str, ...]:
        return self.availability[(q, player)]

    def player_index(self, player: str) -> int:
        try:
            return self.players.index(player)
        except ValueError:
            raise ModelError(f"unknown player {player!r}") from None

    def joint_actions(self, q: str) -> Iterator[tuple[str, ...]]:
        """All joint actions respecting availability at ``q``."""
        return itertools.product(*(self.availability[(q, p)] for p in self.players))

    def is_allowed(self, q: str, joint: tuple[str, ...]) -> bool:
        return len(joint) == len(self.players) and all(
            a in self.availability[(q, p)] for p, a in zip(self.players, joint)
        )

    def delta(self, q: str, joint: tuple[str, ...]) -> dict[str, Fraction]:
        try:
            return self.transitions[(q, tuple(joint))]
        except KeyError:
            raise ModelError(
                f"transition undefined at state {q!r} for joint action {list(joint)}"
            ) from None

    def successors(self, q: str) -> set[str]:
        """States reachable in one step under some allowed joint action."""
        out: set[str] = set()
        for joint in self.joint_actions(q):
            out.update(self.transitions[(q, joint)])
        return out


@dataclass(frozen=True)
class ControllerAdvice:
    # state -> ((joint action, probability), ...), no zero rows
    table: dict[str, tuple[tuple[tuple[str, ...], Fraction], ...]]

    def rows(self, q: str) -> tuple[tuple[tuple[str, ...], Fraction], ...]:
        try:
            return self.table[q]
        except KeyError:
            raise ModelError(f"advice has no entry for state {q!r}") from None


@dataclass(frozen=True)
class ModelStats:
    ell: int
    t: int
    n_states: int
    n_players: int
    n_actions: int


def _validate_game(g: Game) -> None:
    if not g.states:
        raise ModelError("game has no states")
    if len(set(g.states)) != len(g.states):
        raise ModelError("duplicate state ids")
    if not g.players or len(set(g.players)) != len(g.players):
        raise ModelError("players must be a non-empty list without duplicates")
    if not g.actions or len(set(g.actions)) != len(g.actions):
        raise ModelError("actions must be a non-empty list without duplicates")
    if g.initial not in g.states:
        raise ModelError(f"initial state {g.initial!r} is not a state")
    states, actions = set(g.states), set(g.actions)
    for q in g.states:
        for p in g.players:
            avail = g.availability.get((q, p))
            if not avail:
                raise ModelError(f"no available actions for player {p!r} at state {q!r}")
            bad = set(avail) - actions
            if bad:
                raise ModelError(f"unknown action(s) {sorted(bad)} available at state {q!r}")
    for p in g.players:
        if p not in g.goals:
            raise ModelError(f"no goal set for player {p!r}")
        bad = set(g.goals[p]) - states
        if bad:
            raise ModelError(f"goal of player {p!r} names unknown state(s) {sorted(bad)}")
    for (q, joint), dist in g.transitions.items():
        if q not in states:
            raise ModelError(f"transition from unknown state {q!r}")
        if not g.is_allowed(q, joint):
            raise ModelError(
                f"transition defined at state {q!r} for forbidden joint action {list(joint)}"
            )
        for q2, pr in dist.items():
            if q2 not in states:
                raise ModelError(f"transition {q!r}/{list(joint)} targets unknown state {q2!r}")
            if not 0 < pr <= 1:
                raise ModelError(
                    f"transition {q!r}/{list(joint)} -> {q2!r} has probability {pr} outside (0,1]"
                )
        total = sum(dist.values(), ZERO)
        if total != 1:
            raise ModelError(
                f"stochasticity violated at state {q!r}, joint action {list(joint)}: "
                f"row sums to {format_rational(total)}"
            )
    for q in g.states:
        for joint in g.joint_actions(q):
            if (q, joint) not in g.transitions:
                raise ModelError(
                    f"transition missing at state {q!r} for allowed joint action {list(joint)}"
                )


def validate_advice(g: Game, d: ControllerAdvice) -> None:
    for q in d.table:
        if q not in g.states:
            raise ModelError(f"advice names unknown state {q!r}")
    for q in g.states:
        rows = d.rows(q)
        seen = set()
        total = ZERO
        for joint, pr in rows:
            if len(joint) != len(g.players):
                raise ModelError(f"advice row {list(joint)} at state {q!r} has wrong arity")
            for p, a in zip(g.players, joint):
                if a not in g.actions:
                    raise ModelError(f"advice at state {q!r} names unknown action {a!r}")
                if a not in g.availability[(q, p)]:
                    raise ModelError(
                        f"invalid advice at state {q!r}: recommends forbidden action {a!r} "
                        f"to player {p!r} with probability {format_rational(pr)}"
                    )
            if joint in seen:
                raise ModelError(f"duplicate advice row {list(joint)} at state {q!r}")
            seen.add(joint)
            if pr <= 0:
                raise ModelError(f"advice row {list(joint)} at state {q!r} is not positive")
            total += pr
        if total != 1:
            raise ModelError(
                f"advice at state {q!r} sums to {format_rational(total)}, not 1"
            )


def model_stats(g: Game, d: ControllerAdvice) -> ModelStats:
    probs = [pr for dist in g.transitions.values() for pr in dist.values()]
    probs += [pr for rows in d.table.values() for _, pr in rows]
    return ModelStats(
        ell=max((bit_length(x) for x in probs), default=0),
        t=max((len(rows) for rows in d.table.values()), default=0),
        n_states=len(g.states),
        n_players=len(g.players),
        n_actions=len(g.actions),
    )


# ---------------------------------------------------------------------------
# construction helpers


def make_game(
    states: Iterable[str],
    initial: str,
    players: Iterable[str],
    actions: Iterable[str],
    availability: Mapping[tuple[str, str], Iterable[str]],
    transitions: Mapping[tuple[str, tuple[str, ...]], Mapping[str, Any]],
    goals: Mapping[str, Iterable[str]],
) -> Game:
    """Build a game, normalising orders and probabilities."""
    actions = tuple(actions)
    order = {a: k for k, a in enumerate(actions)}
    avail = {}
    for key, acts in availability.items():
        acts = set(acts)
        unknown = acts - set(order)
        if unknown:
            raise ModelError(f"unknown action(s) {sorted(unknown)} available at state {key[0]!r}")
        avail[key] = tuple(sorted(acts, key=order.__getitem__))
    trans = {}
    for (q, joint), dist in transitions.items():
        row = {}
        for q2, pr in dist.items():
            pr = parse_rational(pr)
            if pr != 0:
                row[q2] = row.get(q2, ZERO) + pr
        trans[(q, tuple(joint))] = row
    return Game(
        states=tuple(states),
        initial=initial,
        players=tuple(players),
        actions=actions,
        availability=avail,
        transitions=trans,
        goals={p: frozenset(s) for p, s in goals.items()},
    )


def make_advice(g: Game, table: Mapping[str, Any]) -> ControllerAdvice:
    """Build and validate advice from ``{state: {joint: prob}}``.

    Joints may be tuples or strings (see :func:`parse_joint`).
    """
    out = {}
    for q, rows in table.items():
        items = rows.items() if isinstance(rows, Mapping) else rows
        parsed = []
        for joint, pr in items:
            pr = parse_rational(pr)
            if pr == 0:
                continue
            parsed.append((parse_joint(joint, len(g.players)), pr))
        out[q] = tuple(parsed)
    d = ControllerAdvice(out)
    validate_advice(g, d)
    return d


def parse_joint(joint: Any, n_players: int) -> tuple[str, ...]:
    """A joint action as a list, a comma/space separated string, or a packed
    string of single-character action ids (``"aab"``)."""
    if isinstance(joint, (list, tuple)):
        return tuple(str(a) for a in joint)
    if not isinstance(joint, str):
        raise FormatError(f"bad joint action {joint!r}")
    parts = [s for s in re.split(r"[\s,]+", joint.strip()) if s]
    if len(parts) == n_players:
        return tuple(parts)
    if len(parts) == 1 and len(joint.strip()) == n_players:
        return tuple(joint.strip())
    raise FormatError(f"joint action {joint!r} does not have one action per player ({n_players})")


# ---------------------------------------------------------------------------
# documents


def _load(text: str, what: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{what}: {e.msg} at line {e.lineno} column {e.colno}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{what}: top level must be an object")
    return doc


def _require(doc: Mapping, key: str, what: str):
    if key not in doc:
        raise FormatError(f"{what}: missing field {key!r}")
    return doc[key]


def game_from_dict(doc: Mapping) -> Game:
    states = [str(s) for s in _require(doc, "states", "game")]
    players = [str(p) for p in _require(doc, "players", "game")]
    actions = [str(a) for a in _require(doc, "actions", "game")]
    avail_doc = doc.get("availability", {})
    availability = {}
    for q in states:
        per_state = avail_doc.get(q, {})
        for p in players:
            availability[(q, p)] = per_state.get(p, actions)
    for q, per_state in avail_doc.items():
        if q not in states:
            raise ModelError(f"availability names unknown state {q!r}")
        for p in per_state:
            if p not in players:
                raise ModelError(f"availability at state {q!r} names unknown player {p!r}")

    transitions: dict = {}
    wildcard: dict[str, Any] = {}
    for k, row in enumerate(_require(doc, "transitions", "game")):
        q = str(_require(row, "state", f"transition row {k}"))
        joint = _require(row, "joint", f"transition row {k}")
        dist = _require(row, "to", f"transition row {k}")
        if joint == "*":
            wildcard[q] = dist
            continue
        key = (q, parse_joint(joint, len(players)))
        if key in transitions:
            raise ModelError(f"duplicate transition row for state {q!r}, joint {list(key[1])}")
        transitions[key] = dist
    for q, dist in wildcard.items():
        if q not in states:
            raise ModelError(f"transition from unknown state {q!r}")
        per_player = [availability[(q, p)] for p in players]
        for joint in itertools.product(*per_player):
            transitions.setdefault((q, tuple(joint)), dist)
    goals_doc = _require(doc, "goals", "game")
    goals = {p: goals_doc.get(p, []) for p in players}
    for p in goals_doc:
        if p not in players:
            raise ModelError(f"goal for unknown player {p!r}")
    return make_game(
        states=states,
        initial=str(_require(doc, "initial", "game")),
        players=players,
        actions=actions,
        availability=availability,
        transitions=transitions,
        goals=goals,
    )


def parse_game(text: str) -> Game:
    return game_from_dict(_load(text, "game"))


def advice_from_dict(doc: Mapping, g: Game) -> ControllerAdvice:
    table = _require(doc, "advice", "advice")
    out = {}
    for q, rows in table.items():
        if q not in g.states:
            raise ModelError(f"advice names unknown state {q!r}")
        if isinstance(rows, list):
            rows = [(_require(r, "joint", "advice row"), _require(r, "p", "advice row")) for r in rows]
        out[q] = rows
    for q in g.states:
        if q not in out:
            raise ModelError(f"advice has no entry for state {q!r}")
    return make_advice(g, out)


def parse_advice(text: str, g: Game) -> ControllerAdvice:
    return advice_from_dict(_load(text, "advice"), g)


def game_to_dict(g: Game) -> dict:
    return {
        "states": list(g.states),
        "initial": g.initial,
        "players": list(g.players),
        "actions": list(g.actions),
        "availability": {
            q: {p: list(g.availability[(q, p)]) for p in g.players} for q in g.states
        },
        "transitions": [
            {
                "state": q,
                "joint": list(joint),
                "to": {q2: format_rational(pr) for q2, pr in g.transitions[(q, joint)].items()},
            }
            for q in g.states
            for joint in g.joint_actions(q)
        ],
        "goals": {p: [q for q in g.states if q in g.goals[p]] for p in g.players},
    }


def advice_to_dict(d: ControllerAdvice, g: Game) -> dict:
    return {
        "advice": {
            q: [{"joint": list(joint), "p": format_rational(pr)} for joint, pr in d.rows(q)]
            for q in g.states
        }
    }


def serialize_game(g: Game) -> str:
    return json.dumps(game_to_dict(g), indent=2)


def serialize_advice(d: ControllerAdvice, g: Game) -> str:
    return json.dumps(advice_to_dict(d, g), indent=2)
