"""The reduction from MAX-3SAT to one-player games with private signals.

The pebble first moves to the start of a uniformly chosen clause row.  In
round j the player learns only the round number and picks a truth value for
variable j.  If that value satisfies the current clause the pebble moves to
the winning row, otherwise it stays in its clause row.  After the last round
the winning row pays 1 forever and clause rows pay 0, so the value of a
strategy is the probability of satisfying the hidden clause.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .chain import induce
from .elimination import mp_value
from .model import Game, Outcome, StrategyAutomaton, StrategyProfile

DEFAULT_CAP = int(os.environ.get("BOUNDEDMEM_MAXSAT_CAP", "20"))

TRUE, FALSE = 0, 1


class CnfError(ValueError):
    """A formula is malformed or unusable for the reduction."""


class CapExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured cap."""


@dataclass(frozen=True)
class CnfFormula:
    """Clauses of exactly three literals over variables ``1..variable_count``."""

    variable_count: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.variable_count < 1:
            raise CnfError("at least one variable is needed")
        if not self.clauses:
            raise CnfError("at least one clause is needed")
        for clause in self.clauses:
            if len(clause) != 3:
                raise CnfError(f"clause {list(clause)} does not have exactly 3 literals")
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise CnfError(f"literal {lit} out of range")
            if any(-lit in clause for lit in clause):
                raise CnfError(f"clause {list(clause)} violates reduction precondition (tautology)")
            if len(set(clause)) != 3:
                raise CnfError(f"clause {list(clause)} repeats a literal")

    @property
    def clause_count(self) -> int:
        return len(self.clauses)

    def satisfied(self, nu: Sequence[bool]) -> int:
        """Number of clauses made true by the interpretation ``nu``."""
        if len(nu) != self.variable_count:
            raise CnfError("interpretation length differs from the variable count")
        return sum(
            any(nu[abs(l) - 1] == (l > 0) for l in clause) for clause in self.clauses
        )

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.variable_count} {self.clause_count}"]
        lines += [" ".join(str(l) for l in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(data: bytes | str) -> CnfFormula:
    """Read a DIMACS CNF file; duplicate literals in a clause are merged."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    header = None
    tokens: list[int] = []
    for raw in data.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise CnfError(f"malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise CnfError(f"malformed header {line!r}") from None
            continue
        if header is None:
            raise CnfError("clause before the header")
        try:
            tokens.extend(int(t) for t in line.split())
        except ValueError:
            raise CnfError(f"malformed clause line {line!r}") from None
    if header is None:
        raise CnfError("missing header")
    clauses = []
    current: list[int] = []
    for t in tokens:
        if t == 0:
            merged = tuple(dict.fromkeys(current))
            if any(-l in merged for l in merged):
                raise CnfError(f"clause {current} violates reduction precondition (tautology)")
            if len(merged) != 3:
                raise CnfError(f"clause {current} has width {len(merged)}, expected 3")
            clauses.append(merged)
            current = []
        else:
            current.append(t)
    if current:
        raise CnfError("last clause is not terminated by 0")
    m, n = header
    if len(clauses) != n:
        raise CnfError(f"header announces {n} clauses, found {len(clauses)}")
    return CnfFormula(m, tuple(clauses))


def clause_state(i: int, j: int) -> str:
    return f"c{i}_{j}"


def win_state(j: int) -> str:
    return f"w_{j}"


def build_game(phi: CnfFormula) -> Game:
    """The one-player game whose value is the best fraction of satisfiable clauses."""
    n, m = phi.clause_count, phi.variable_count
    names = ["init"]
    names += [clause_state(i, j) for i in range(1, n + 1) for j in range(1, m + 2)]
    names += [win_state(j) for j in range(1, m + 2)]
    ix = {s: k for k, s in enumerate(names)}
    zero = (Fraction(0),)
    one = Fraction(1)

    def step(target: str, j: int, reward=zero) -> tuple[Outcome, ...]:
        return (Outcome(one, reward, (j,), ix[target]),)

    transitions = {}
    first = tuple(
        Outcome(Fraction(1, n), zero, (1,), ix[clause_state(i, 1)]) for i in range(1, n + 1)
    )
    for a in (TRUE, FALSE):
        transitions[(0, (a,))] = first
    for i, clause in enumerate(phi.clauses, start=1):
        for j in range(1, m + 1):
            nxt = min(j + 1, m + 1)
            for a in (TRUE, FALSE):
                wins = (j in clause and a == TRUE) or (-j in clause and a == FALSE)
                target = win_state(nxt) if wins else clause_state(i, nxt)
                transitions[(ix[clause_state(i, j)], (a,))] = step(target, nxt)
        for a in (TRUE, FALSE):
            transitions[(ix[clause_state(i, m + 1)], (a,))] = step(clause_state(i, m + 1), m + 1)
    for j in range(1, m + 1):
        for a in (TRUE, FALSE):
            transitions[(ix[win_state(j)], (a,))] = step(win_state(j + 1), j + 1)
    for a in (TRUE, FALSE):
        transitions[(ix[win_state(m + 1)], (a,))] = step(win_state(m + 1), m + 1, (one,))
    return Game(
        tuple(names),
        (("true", "false"),),
        (tuple(str(j) for j in range(m + 2)),),
        0,
        (0,),
        transitions,
    )


def interpretation_to_strategy(phi: CnfFormula, nu: Sequence[bool]) -> StrategyAutomaton:
    """Play the value of variable j on signal j; play "true" on other signals."""
    if len(nu) != phi.variable_count:
        raise CnfError("interpretation length differs from the variable count")
    choice = {0: {TRUE: Fraction(1)}, phi.variable_count + 1: {TRUE: Fraction(1)}}
    for j in range(1, phi.variable_count + 1):
        choice[j] = {TRUE if nu[j - 1] else FALSE: Fraction(1)}
    return StrategyAutomaton.memoryless(0, choice)


def _check_cap(phi: CnfFormula, cap: int | None) -> None:
    cap = DEFAULT_CAP if cap is None else cap
    if phi.variable_count > cap:
        raise CapExceeded(f"{phi.variable_count} variables exceed the cap of {cap}")


def _interpretations(m: int):
    """All interpretations, lexicographically with False before True."""
    for bits in product((False, True), repeat=m):
        yield bits


def max_sat_bruteforce(phi: CnfFormula, cap: int | None = None) -> tuple[int, tuple[bool, ...]]:
    """Largest number of simultaneously satisfiable clauses and the first witness."""
    _check_cap(phi, cap)
    best, witness = -1, None
    for nu in _interpretations(phi.variable_count):
        b = phi.satisfied(nu)
        if b > best:
            best, witness = b, nu
    return best, witness


def strategy_value(phi: CnfFormula, strategy: StrategyAutomaton, game: Game | None = None) -> Fraction:
    game = build_game(phi) if game is None else game
    # Unreachable chain states cannot change the value, so they are pruned here.
    return mp_value(induce(game, StrategyProfile((strategy,)), 0, prune=True))


def game_value_memoryless_det(phi: CnfFormula, cap: int | None = None) -> Fraction:
    """Best value over all deterministic memoryless strategies."""
    _check_cap(phi, cap)
    game = build_game(phi)
    return max(
        strategy_value(phi, interpretation_to_strategy(phi, nu), game)
        for nu in _interpretations(phi.variable_count)
    )
