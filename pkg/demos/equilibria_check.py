"""Checking approximate equilibria and guarantees in matching pennies.

Deviations range over a grid of strategies whose probabilities are
multiples of 1/g.  Exact mode compares rational values; float mode
evaluates with a precision derived from epsilon and uses a looser
threshold.
"""

from __future__ import annotations

from fractions import Fraction

from boundedmem.equilibria import GridSpec, best_response_grid, check_eps_achieve, check_eps_ne
from boundedmem.generators import matching_pennies
from boundedmem.model import StrategyAutomaton, StrategyProfile

game = matching_pennies()
uniform = StrategyProfile(tuple(StrategyAutomaton.uniform(game, i) for i in range(2)))
heads = StrategyProfile(tuple(StrategyAutomaton.constant(game, i, 0) for i in range(2)))

# %% The uniform profile: no grid deviation gains anything.
report = check_eps_ne(game, uniform, 0, GridSpec(4))
print("uniform, eps=0:", report.verdict, [str(e.gain) for e in report.entries])

# %% Both players on heads: the second player gains 2 by switching.
report = check_eps_ne(game, heads, Fraction(1, 2), GridSpec(1, deterministic_only=True))
print("heads, eps=1/2:", report.verdict, [str(e.gain) for e in report.entries])
strategy, value = best_response_grid(game, heads, 1, 1, GridSpec(2))
print("  best reply of player 2:", strategy.action_dist[(0, 0)], "value", value)

# %% Float mode with a threshold of 7/3 eps.
report = check_eps_ne(game, uniform, Fraction(1, 10), GridSpec(2), mode="float")
print("uniform, float mode:", report.verdict, "threshold", report.threshold,
      "precision", report.entries[0].precision)

# %% What can player 1 guarantee with the uniform strategy?
for v in (Fraction(0), Fraction(1, 2)):
    r = check_eps_achieve(game, uniform.strategies[0], v, Fraction(1, 10), GridSpec(3))
    print(f"guarantee {v} up to 1/10:", r.verdict)
