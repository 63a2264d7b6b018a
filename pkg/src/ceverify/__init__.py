"""Exact verification of correlated equilibria in stochastic reachability games."""

from .model import ControllerAdvice, Game, make_advice, make_game, parse_advice, parse_game
from .verify import DeviationWitness, Verdict, verify_all, verify_ce, verify_spce

__all__ = [
    "ControllerAdvice", "Game", "make_advice", "make_game", "parse_advice", "parse_game",
    "DeviationWitness", "Verdict", "verify_all", "verify_ce", "verify_spce",
]
