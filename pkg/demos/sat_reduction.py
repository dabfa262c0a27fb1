"""From a 3-CNF formula to a one-player game whose value counts clauses.

The player picks a truth value for each variable without seeing which
clause was drawn, so a memoryless deterministic strategy is an
interpretation and its value is the fraction of satisfied clauses.
"""

from __future__ import annotations

from boundedmem.sat import (
    CnfFormula,
    build_game,
    game_value_memoryless_det,
    interpretation_to_strategy,
    max_sat_bruteforce,
    strategy_value,
)

# (x1 or x2 or x3) and (not x1 or not x2 or not x3) and (x1 or not x2 or x3)
phi = CnfFormula(3, ((1, 2, 3), (-1, -2, -3), (1, -2, 3)))
game = build_game(phi)
print(f"{phi.clause_count} clauses -> game with {len(game.states)} states")

for nu in [(True, True, True), (False, False, False), (True, False, False)]:
    value = strategy_value(phi, interpretation_to_strategy(phi, nu), game)
    print(f"  {nu}: {phi.satisfied(nu)} clauses satisfied, value {value}")

best, witness = max_sat_bruteforce(phi)
print("best interpretation:", witness, "satisfies", best)
print("game value over memoryless deterministic strategies:", game_value_memoryless_det(phi))

# %% An unsatisfiable formula: all eight sign patterns on three variables.
clauses = tuple(
    tuple(v if (mask >> (v - 1)) & 1 else -v for v in (1, 2, 3)) for mask in range(8)
)
unsat = CnfFormula(3, clauses)
print("unsatisfiable formula value:", game_value_memoryless_det(unsat), "(never above 1 - 1/n)")
