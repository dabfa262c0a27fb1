"""Bounded-memory strategies in stochastic games with private signals.

The package evaluates the Markov chains induced by finite-memory strategy
profiles, exactly or with bounded-precision floats, reduces MAX-3SAT to
one-player games, checks approximate equilibria over strategy grids, and
writes equilibrium questions as real-arithmetic formulas in SMT-LIB2.
"""

from __future__ import annotations

from .chain import EdgeData, MarkovChain, induce, n_bound, parse_chain, serialize_chain
from .elimination import eliminate_loop, eliminate_state, mp_value, run_schedule
from .approx import mp_value_float
from .model import (
    Game,
    Outcome,
    StrategyAutomaton,
    StrategyProfile,
    parse_game,
    parse_profile,
    serialize_game,
    serialize_profile,
)
from .oracle import oracle_value

__version__ = "0.1.0"

__all__ = [
    "EdgeData",
    "Game",
    "MarkovChain",
    "Outcome",
    "StrategyAutomaton",
    "StrategyProfile",
    "eliminate_loop",
    "eliminate_state",
    "induce",
    "mp_value",
    "mp_value_float",
    "n_bound",
    "oracle_value",
    "parse_chain",
    "parse_game",
    "parse_profile",
    "run_schedule",
    "serialize_chain",
    "serialize_game",
    "serialize_profile",
]
