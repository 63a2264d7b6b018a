"""Command-line entry point.

Every command prints one JSON report on stdout. Exit codes: 0 success or
equilibrium holds, 1 equilibrium violated, 2 input error, 3 resource cap hit.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from decimal import Context, Decimal
from fractions import Fraction

from . import bayesnet as bn
from . import cvp, oracle
from .chains import payoff_under_advice
from .mdp import solve_mdp
from .model import (
    FormatError,
    ModelError,
    advice_from_dict,
    advice_to_dict,
    format_rational,
    game_from_dict,
    game_to_dict,
    model_stats,
)
from .product import Advised, Plain, build_chain, build_mdp, product_as_game_dict
from .verify import verify_ce, verify_spce

OK, VIOLATED, INPUT_ERROR, CAP_EXCEEDED = 0, 1, 2, 3
_DECIMAL = Context(prec=12)


def rational(x: Fraction) -> dict:
    approx = _DECIMAL.divide(Decimal(x.numerator), Decimal(x.denominator))
    return {"exact": format_rational(x), "approx": format(approx, "g")}


class _Inputs:
    """Reads documents and remembers their digests for the report."""

    def __init__(self):
        self.digests = {}
        self._stdin = None

    def text(self, role: str, path: str) -> str:
        if path == "-":
            if self._stdin is None:
                self._stdin = sys.stdin.read()
            data = self._stdin
        else:
            with open(path, encoding="utf-8") as fh:
                data = fh.read()
        self.digests[role] = {"path": path, "sha256": hashlib.sha256(data.encode()).hexdigest()}
        return data

    def json(self, role: str, path: str) -> dict:
        data = self.text(role, path)
        try:
            return json.loads(data)
        except json.JSONDecodeError as e:
            raise FormatError(f"{role} {path}: {e.msg} at line {e.lineno} column {e.colno}") from None

    def model(self, game_path: str, advice_path):
        """Game and advice. When the advice path is omitted, the game document
        must hold both under ``game`` and ``advice``; the reports printed by
        ``from-cvp`` and ``bn-unfold`` qualify."""
        doc = self.json("game", game_path)
        if advice_path is None and "result" in doc:
            doc = doc["result"]  # a report printed by another command
        if advice_path is None:
            if "game" not in doc or "advice" not in doc:
                raise FormatError("no advice given: pass an advice document or a game+advice bundle")
            g = game_from_dict(doc["game"])
            return g, advice_from_dict(doc["advice"], g)
        g = game_from_dict(doc)
        return g, advice_from_dict(self.json("advice", advice_path), g)


def _witness(w) -> dict:
    return {
        "player": w.player,
        "state": w.state,
        "recommended": w.recommended,
        "alternative": w.alternative,
        "value_following": rational(w.value_following),
        "value_deviating": rational(w.value_deviating),
        "kind": w.kind,
    }


def _verdict(v) -> dict:
    out = {"holds": v.holds}
    if v.witness is not None:
        out["witness"] = _witness(v.witness)
    return out


def _check_player(g, player):
    if player not in g.players:
        raise ModelError(f"unknown player {player!r}")


def _check_state(g, q):
    if q not in g.states:
        raise ModelError(f"unknown state {q!r}")


def _dump_product(path, g, d):
    doc = {}
    for p in g.players:
        doc[p] = {
            "chain": product_as_game_dict(build_chain(g, d, p)),
            "mdp": product_as_game_dict(build_mdp(g, d, p)),
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, result dict)


def cmd_validate(args, inp):
    g, d = inp.model(args.game, args.advice)
    s = model_stats(g, d)
    return OK, {
        "valid": True,
        "states": s.n_states, "players": s.n_players, "actions": s.n_actions,
        "max_bits": s.ell, "rows": s.t,
    }


def cmd_payoff(args, inp):
    g, d = inp.model(args.game, args.advice)
    start = args.state or g.initial
    _check_state(g, start)
    players = [args.player] if args.player else list(g.players)
    for p in players:
        _check_player(g, p)
    return OK, {"state": start, "payoffs": {p: rational(payoff_under_advice(g, d, p, start)) for p in players}}


def cmd_solve_mdp(args, inp):
    g, d = inp.model(args.game, args.advice)
    _check_player(g, args.player)
    start = args.state or g.initial
    _check_state(g, start)
    mdp = build_mdp(g, d, args.player)
    anchor = Plain(start)
    sol = solve_mdp(mdp, anchor)
    policy = [
        {"state": s.state, "recommended": s.action, "play": sol.policy[s]}
        for s in mdp.states
        if isinstance(s, Advised) and s in sol.values and sol.policy[s] != s.action
    ]
    out = {
        "player": args.player,
        "state": start,
        "value": rational(sol.values[anchor]),
        "value_following": rational(payoff_under_advice(g, d, args.player, start)),
        "deviations": policy,
        "iterations": sol.iterations,
    }
    if args.brute_force:
        value, _ = oracle.enumerate_policies(mdp, anchor)
        out["brute_force_value"] = rational(value)
        out["agrees"] = value == sol.values[anchor]
    return OK, out


def _verify(which):
    def run(args, inp):
        g, d = inp.model(args.game, args.advice)
        if args.dump_product:
            _dump_product(args.dump_product, g, d)
        out = {}
        holds = True
        if which in ("ce", "all"):
            v = verify_ce(g, d, jobs=args.jobs)
            out["ce"] = _verdict(v)
            holds &= v.holds
            if args.brute_force:
                out["ce"]["brute_force_agrees"] = oracle.brute_force_ce(g, d).holds == v.holds
        if which in ("spce", "all"):
            v = verify_spce(g, d, jobs=args.jobs)
            out["spce"] = _verdict(v)
            holds &= v.holds
            if args.brute_force:
                out["spce"]["brute_force_agrees"] = oracle.brute_force_spce(g, d).holds == v.holds
        return (OK if holds else VIOLATED), out

    return run


def cmd_from_cvp(args, inp):
    c = cvp.circuit_from_dict(inp.json("circuit", args.circuit))
    g, d = cvp.reduce(c)
    return OK, {"game": game_to_dict(g), "advice": advice_to_dict(d, g), "circuit_value": cvp.eval_circuit(c)}


def _evidence(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise FormatError(f"evidence {item!r} is not of the form vertex=value")
        v, x = item.split("=", 1)
        out[v] = x
    return out


def cmd_bn_infer(args, inp):
    net = bn.net_from_dict(inp.json("net", args.net))
    evidence = _evidence(args.evidence)
    p = bn.infer(net, args.query, args.value, evidence)
    return OK, {"query": args.query, "value": args.value, "evidence": evidence, "probability": rational(p)}


def cmd_bn_unfold(args, inp):
    skeleton, advice, trans = bn.model_from_dict(inp.json("model", args.model))
    g, d = bn.unfold(skeleton, advice, trans, budget=args.budget)
    return OK, {"game": game_to_dict(g), "advice": advice_to_dict(d, g)}


def cmd_simulate(args, inp):
    g, d = inp.model(args.game, args.advice)
    _check_player(g, args.player)
    start = args.state or g.initial
    _check_state(g, start)
    r = oracle.simulate(g, d, args.player, start, args.trials, args.horizon, args.seed)
    exact = payoff_under_advice(g, d, args.player, start)
    return OK, {
        "player": args.player, "state": start,
        "trials": r.trials, "hits": r.hits, "estimate": r.estimate, "stderr": r.stderr,
        "seed": r.seed, "horizon": r.horizon, "generator": "numpy PCG64, chunk c seeded with [seed, c]",
        "exact_value": rational(exact),
        "truncation_bound": oracle.truncation_bound(g, d, args.player, start, args.horizon),
    }


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ceverify", description="Verify correlated equilibria of stochastic games.")
    sub = ap.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def model_cmd(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("game", help="game document, or a game+advice bundle; '-' reads stdin")
        p.add_argument("advice", nargs="?", help="advice document")
        p.set_defaults(func=func)
        return p

    model_cmd("validate", cmd_validate, "check a game and advice")
    p = model_cmd("payoff", cmd_payoff, "expected payoffs when everyone follows the advice")
    p.add_argument("--player")
    p.add_argument("--state")
    p = model_cmd("solve-mdp", cmd_solve_mdp, "best deviation value for one player")
    p.add_argument("--player", required=True)
    p.add_argument("--state")
    p.add_argument("--brute-force", action="store_true", help="also enumerate every policy")
    for name, which in (("verify-ce", "ce"), ("verify-spce", "spce"), ("verify-all", "all")):
        p = model_cmd(name, _verify(which), f"decide {which.upper() if which != 'all' else 'CE and SPCE'}")
        p.add_argument("--jobs", type=int, default=1, help="check players in parallel")
        p.add_argument("--dump-product", metavar="PATH", help="write product chains and MDPs as JSON")
        p.add_argument("--brute-force", action="store_true", help="cross-check with policy enumeration")
    p = sub.add_parser("from-cvp", help="reduce a circuit to a game and advice")
    p.add_argument("circuit")
    p.set_defaults(func=cmd_from_cvp)
    p = sub.add_parser("bn-infer", help="one marginal query on a network")
    p.add_argument("net")
    p.add_argument("--query", required=True)
    p.add_argument("--value", required=True)
    p.add_argument("--evidence", action="append", metavar="VERTEX=VALUE")
    p.set_defaults(func=cmd_bn_infer)
    p = sub.add_parser("bn-unfold", help="explicit game and advice from a network model")
    p.add_argument("model")
    p.add_argument("--budget", type=int, default=1 << 16)
    p.set_defaults(func=cmd_bn_unfold)
    p = model_cmd("simulate", cmd_simulate, "Monte-Carlo estimate of a payoff")
    p.add_argument("--player", required=True)
    p.add_argument("--state")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    inp = _Inputs()
    t0 = time.perf_counter()
    try:
        code, result = args.func(args, inp)
    except (oracle.CapExceeded, bn.BudgetExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return CAP_EXCEEDED
    except (FormatError, ModelError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    report = {
        "command": args.command,
        "inputs": inp.digests,
        "result": result,
        "seconds": round(time.perf_counter() - t0, 6),
    }
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
